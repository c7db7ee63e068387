use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{mel_filterbank, AudioClip, SpectralSequence};
use crate::{Error, Result, FRAME_RATE, MEL_BANDS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontendConfig {
    /// Clips are linearly resampled to this rate before analysis.
    pub analysis_rate: u32,
    pub frame_rate: u32,
    pub window_ms: f64,
    pub pre_emphasis: f64,
    pub n_fft: usize,
    pub low_hz: f64,
    /// Upper edge of the top mel band; `None` means Nyquist of `analysis_rate`.
    pub high_hz: Option<f64>,
    pub log_floor: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            analysis_rate: 16_000,
            frame_rate: FRAME_RATE,
            window_ms: 25.0,
            pre_emphasis: 0.97,
            n_fft: 512,
            low_hz: 0.0,
            high_hz: None,
            log_floor: 1e-10,
        }
    }
}

impl FrontendConfig {
    pub fn hop_len(&self) -> usize {
        (self.analysis_rate / self.frame_rate) as usize
    }

    pub fn win_len(&self) -> usize {
        (self.window_ms * 1e-3 * self.analysis_rate as f64).round() as usize
    }

    pub fn high_hz(&self) -> f64 {
        self.high_hz.unwrap_or(self.analysis_rate as f64 / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_rate != FRAME_RATE {
            return Err(Error::Config(format!(
                "frame_rate must be {FRAME_RATE} Hz, got {}",
                self.frame_rate
            )));
        }
        if self.analysis_rate == 0 || !self.analysis_rate.is_multiple_of(self.frame_rate) {
            return Err(Error::Config(format!(
                "analysis_rate {} is not a multiple of the frame rate",
                self.analysis_rate
            )));
        }
        let win = self.win_len();
        if win == 0 || win > self.n_fft {
            return Err(Error::Config(format!(
                "window of {win} samples does not fit FFT size {}",
                self.n_fft
            )));
        }
        if !(0.0..1.0).contains(&self.pre_emphasis) {
            return Err(Error::Config("pre_emphasis must lie in [0, 1)".into()));
        }
        if self.log_floor.is_nan() || self.log_floor <= 0.0 {
            return Err(Error::Config("log_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Linear-interpolation resampler.
pub fn resample_linear(samples: &[f64], from_rate: u32, to_rate: u32) -> Vec<f64> {
    if from_rate == to_rate || samples.is_empty() {
        return samples.to_vec();
    }
    let ratio = from_rate as f64 / to_rate as f64;
    let out_len = ((samples.len() as f64) / ratio).round().max(1.0) as usize;
    let last = samples.len() - 1;
    (0..out_len)
        .map(|i| {
            let t = i as f64 * ratio;
            let k = (t.floor() as usize).min(last);
            let frac = t - k as f64;
            let next = samples[(k + 1).min(last)];
            samples[k] + (next - samples[k]) * frac
        })
        .collect()
}

/// Number of analysis frames for `len` samples. Clips shorter than one window
/// are zero-padded to a single frame.
pub fn frame_count(len: usize, win_len: usize, hop_len: usize) -> usize {
    if len == 0 {
        0
    } else if len < win_len {
        1
    } else {
        (len - win_len) / hop_len + 1
    }
}

fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Log mel filterbank energies (MFSC), one 40-band frame per hop.
pub fn extract_mfsc(clip: &AudioClip, cfg: &FrontendConfig) -> Result<SpectralSequence> {
    cfg.validate()?;
    if clip.samples().is_empty() {
        return Err(Error::invalid("empty audio clip"));
    }
    let high_hz = cfg.high_hz();
    if (clip.sample_rate() as f64) < 2.0 * high_hz {
        return Err(Error::invalid(format!(
            "sample rate {} Hz is below twice the highest mel band edge ({high_hz} Hz)",
            clip.sample_rate()
        )));
    }
    let fb = mel_filterbank(
        MEL_BANDS,
        cfg.n_fft,
        cfg.analysis_rate as f64,
        cfg.low_hz,
        high_hz,
    )?;

    let x = resample_linear(clip.samples(), clip.sample_rate(), cfg.analysis_rate);
    let mut emph = Vec::with_capacity(x.len());
    emph.push(x[0]);
    emph.extend(x.windows(2).map(|w| w[1] - cfg.pre_emphasis * w[0]));

    let (win, hop) = (cfg.win_len(), cfg.hop_len());
    let n_frames = frame_count(emph.len(), win, hop);
    let window = hamming(win);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.n_fft);
    let mut buf = vec![Complex::new(0.0, 0.0); cfg.n_fft];
    let mut power = vec![0.0; cfg.n_fft / 2 + 1];
    let mut energies = [0.0; MEL_BANDS];
    let mut frames = Vec::with_capacity(n_frames);

    for j in 0..n_frames {
        let start = j * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            let v = if i < win {
                emph.get(start + i).copied().unwrap_or(0.0) * window[i]
            } else {
                0.0
            };
            *b = Complex::new(v, 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr() / cfg.n_fft as f64;
        }
        fb.apply(&power, &mut energies);
        frames.push(std::array::from_fn(|b| energies[b].max(cfg.log_floor).ln()));
    }
    SpectralSequence::new(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, rate: u32, secs: f64) -> AudioClip {
        let n = (rate as f64 * secs) as usize;
        let s = (0..n)
            .map(|i| 0.5 * (2.0 * PI * freq * i as f64 / rate as f64).sin())
            .collect();
        AudioClip::new(s, rate).unwrap()
    }

    #[test]
    fn one_second_frame_count_follows_hop_formula() {
        let clip = sine(440.0, 16_000, 1.0);
        let seq = extract_mfsc(&clip, &FrontendConfig::default()).unwrap();
        // floor((16000 - 400) / 160) + 1
        assert_eq!(seq.len(), 98);
        assert_eq!(seq.len(), frame_count(16_000, 400, 160));
    }

    #[test]
    fn silence_hits_log_floor_everywhere() {
        let clip = AudioClip::new(vec![0.0; 8000], 16_000).unwrap();
        let cfg = FrontendConfig::default();
        let seq = extract_mfsc(&clip, &cfg).unwrap();
        let floor = cfg.log_floor.ln();
        for f in &seq.frames {
            assert!(f.iter().all(|&v| v == floor));
        }
    }

    #[test]
    fn deterministic_output() {
        let clip = sine(300.0, 44_100, 0.3);
        let cfg = FrontendConfig::default();
        let a = extract_mfsc(&clip, &cfg).unwrap();
        let b = extract_mfsc(&clip, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        let cfg = FrontendConfig::default();
        assert!(extract_mfsc(&AudioClip::new(vec![], 16_000).unwrap(), &cfg).is_err());
        // 8 kHz audio cannot feed bands reaching 8 kHz.
        assert!(extract_mfsc(&sine(100.0, 8_000, 0.2), &cfg).is_err());
        let bad = FrontendConfig {
            frame_rate: 50,
            ..FrontendConfig::default()
        };
        assert!(extract_mfsc(&sine(100.0, 16_000, 0.2), &bad).is_err());
    }

    #[test]
    fn short_clip_gives_one_frame() {
        let clip = AudioClip::new(vec![0.1; 100], 16_000).unwrap();
        let seq = extract_mfsc(&clip, &FrontendConfig::default()).unwrap();
        assert_eq!(seq.len(), 1);
    }

    #[test]
    fn resampling_preserves_duration() {
        let x: Vec<f64> = (0..44_100).map(|i| i as f64).collect();
        let y = resample_linear(&x, 44_100, 16_000);
        assert_eq!(y.len(), 16_000);
        assert_eq!(y[0], 0.0);
        assert!((y[1] - 44_100.0 / 16_000.0).abs() < 1e-9);
    }
}
