//! Deterministic synthetic corpora.
//!
//! [`generate`] builds feature-level utterances whose shape targets come from
//! seven distinct ground-truth maps, one per emotion, so the benefit of
//! emotion-dependent regressors can be measured without recorded data.
//! [`write_disk_corpus`] writes WAV files, 25 Hz landmark CSVs and a manifest
//! that exercise the full file-based pipeline.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::audio::{write_wav, AudioClip, SpectralImage, SpectralSequence};
use crate::corpus::{write_manifest, FeatureUtterance, UtteranceRecord};
use crate::emotion::{Emotion, EMOTION_COUNT};
use crate::shape::{write_landmark_csv, LandmarkShape, ShapeParams};
use crate::window::half_width;
use crate::{Error, Result, MEL_BANDS};

/// Mel bands averaged into each coarse feature of the ground-truth maps.
const BANDS_PER_GROUP: usize = 5;
const GROUPS: usize = MEL_BANDS / BANDS_PER_GROUP;
/// Each frame's target depends on acoustic frames within this many steps.
const REACH: usize = 1;
const FEATURES: usize = GROUPS * (2 * REACH + 1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_utterances: usize,
    pub frames_per_utterance: usize,
    pub ka: usize,
    pub kv: usize,
    /// Shape parameters per frame.
    pub d: usize,
    /// Standard deviation of additive target noise.
    pub noise: f64,
    /// Scale of the per-emotion spectral offset that makes emotions audible.
    pub signature: f64,
    /// Required mean distance between any two emotions' window maps.
    pub margin: f64,
    /// Temporal correlation of the acoustic process.
    pub smoothness: f64,
    pub speakers: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_utterances: 140,
            frames_per_utterance: 150,
            ka: 15,
            kv: 5,
            d: 18,
            noise: 0.05,
            signature: 0.6,
            margin: 1.0,
            smoothness: 0.8,
            speakers: 4,
            seed: 0,
        }
    }
}

/// Per-frame map: tanh(W · coarse(frames t-1..t+1) + b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionMap {
    /// d x FEATURES, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// The seven ground-truth maps plus the spectral signature of each emotion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub maps: Vec<EmotionMap>,
    pub signatures: Vec<Vec<f64>>,
    pub d: usize,
    pub kv: usize,
}

fn coarse_features(column: impl Fn(isize) -> [f64; MEL_BANDS]) -> [f64; FEATURES] {
    let mut out = [0.0; FEATURES];
    for (slot, off) in (-(REACH as isize)..=REACH as isize).enumerate() {
        let col = column(off);
        for g in 0..GROUPS {
            let s: f64 = col[g * BANDS_PER_GROUP..(g + 1) * BANDS_PER_GROUP].iter().sum();
            out[slot * GROUPS + g] = s / BANDS_PER_GROUP as f64;
        }
    }
    out
}

impl EmotionMap {
    fn apply(&self, features: &[f64; FEATURES]) -> Vec<f64> {
        self.bias
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let row = &self.weights[k * FEATURES..(k + 1) * FEATURES];
                (b + row.iter().zip(features).map(|(w, x)| w * x).sum::<f64>()).tanh()
            })
            .collect()
    }
}

impl GroundTruth {
    pub fn map(&self, e: Emotion) -> &EmotionMap {
        &self.maps[e.index()]
    }

    /// Noise-free parameters of frame `t` of a frame sequence.
    pub fn frame_params(&self, e: Emotion, frames: &[[f64; MEL_BANDS]], t: usize) -> Vec<f64> {
        let last = frames.len() as isize - 1;
        let feats = coarse_features(|off| frames[(t as isize + off).clamp(0, last) as usize]);
        self.map(e).apply(&feats)
    }

    /// G_e: the full kv-frame shape window implied by a spectral image.
    /// Needs (ka - 1) / 2 >= (kv - 1) / 2 + 1 so every offset sees its neighbours.
    pub fn window_map(&self, e: Emotion, image: &SpectralImage) -> Result<Vec<f64>> {
        let da = half_width(image.ka)?;
        let dv = half_width(self.kv)?;
        if da < dv + REACH {
            return Err(Error::invalid(format!(
                "ka={} too narrow for kv={} ground-truth windows",
                image.ka, self.kv
            )));
        }
        let mut out = Vec::with_capacity(self.d * self.kv);
        for v in 0..self.kv {
            let centre = (da + v - dv) as isize;
            let feats = coarse_features(|off| image.column((centre + off) as usize));
            out.extend(self.map(e).apply(&feats));
        }
        Ok(out)
    }

    /// Monte-Carlo mean ‖G_a(x) − G_b(x)‖ over random acoustic frames.
    pub fn mean_separation(&self, a: Emotion, b: Emotion, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames: Vec<[f64; MEL_BANDS]> = (0..samples + 2 * REACH + self.kv)
            .map(|_| std::array::from_fn(|_| rng.sample(StandardNormal)))
            .collect();
        let mut total = 0.0;
        for s in 0..samples {
            let mut sq = 0.0;
            for v in 0..self.kv {
                let t = s + REACH + v;
                let pa = self.frame_params(a, &frames, t);
                let pb = self.frame_params(b, &frames, t);
                sq += pa.iter().zip(&pb).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            }
            total += sq.sqrt();
        }
        total / samples as f64
    }

    fn min_separation(&self, seed: u64) -> f64 {
        let mut min = f64::INFINITY;
        for a in 0..EMOTION_COUNT {
            for b in a + 1..EMOTION_COUNT {
                let s = self.mean_separation(Emotion::ALL[a], Emotion::ALL[b], 100, seed);
                min = min.min(s);
            }
        }
        min
    }
}

fn smooth_profile(rng: &mut ChaCha8Rng) -> [f64; MEL_BANDS] {
    let raw: Vec<f64> = (0..MEL_BANDS + 4).map(|_| rng.sample(StandardNormal)).collect();
    std::array::from_fn(|b| raw[b..b + 5].iter().sum::<f64>() / 5f64.sqrt())
}

fn sample_truth(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> GroundTruth {
    // Neighbouring bands of the smoothed process are correlated (triangular,
    // lag < 5), so a five-band mean has variance 17/25 rather than 1/5. Scale
    // so pre-activations have roughly unit variance: tanh is curved but not saturated.
    let gain = 1.0 / (FEATURES as f64 * 17.0 / 25.0).sqrt();
    let maps = (0..EMOTION_COUNT)
        .map(|_| EmotionMap {
            weights: (0..spec.d * FEATURES)
                .map(|_| gain * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            bias: (0..spec.d).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect(),
        })
        .collect();
    let signatures = (0..EMOTION_COUNT)
        .map(|_| smooth_profile(rng).iter().map(|v| v * spec.signature).collect())
        .collect();
    GroundTruth {
        maps,
        signatures,
        d: spec.d,
        kv: spec.kv,
    }
}

/// A synthetic corpus in the same in-memory form the file pipeline produces.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub truth: GroundTruth,
    pub utterances: Vec<FeatureUtterance>,
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    half_width(spec.ka)?;
    half_width(spec.kv)?;
    if spec.d == 0 || spec.frames_per_utterance == 0 || spec.speakers == 0 {
        return Err(Error::invalid("synthetic spec needs positive d, frame count and speakers"));
    }
    if spec.noise.is_nan() || spec.noise < 0.0 || !(0.0..1.0).contains(&spec.smoothness) {
        return Err(Error::invalid("noise must be >= 0 and smoothness in [0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut truth = sample_truth(spec, &mut rng);
    let mut attempts = 1;
    while truth.min_separation(spec.seed) <= spec.margin {
        if attempts == 100 {
            return Err(Error::invalid(format!(
                "could not draw maps separated by margin {}",
                spec.margin
            )));
        }
        truth = sample_truth(spec, &mut rng);
        attempts += 1;
    }

    let rho = spec.smoothness;
    let innovation = (1.0 - rho * rho).sqrt();
    let utterances = (0..spec.n_utterances)
        .map(|u| {
            let emotion = Emotion::ALL[u % EMOTION_COUNT];
            let signature = &truth.signatures[emotion.index()];
            let mut state = smooth_profile(&mut rng);
            let frames: Vec<[f64; MEL_BANDS]> = (0..spec.frames_per_utterance)
                .map(|_| {
                    let eps = smooth_profile(&mut rng);
                    for b in 0..MEL_BANDS {
                        state[b] = rho * state[b] + innovation * eps[b];
                    }
                    std::array::from_fn(|b| state[b] + signature[b])
                })
                .collect();
            let params = (0..frames.len())
                .map(|t| ShapeParams {
                    coeffs: truth
                        .frame_params(emotion, &frames, t)
                        .into_iter()
                        .map(|v| v + spec.noise * rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                })
                .collect();
            FeatureUtterance {
                id: format!("syn{u:05}"),
                speaker: format!("spk{}", u % spec.speakers),
                emotion,
                mfsc: SpectralSequence { frames },
                params,
            }
        })
        .collect();
    Ok(SyntheticCorpus { truth, utterances })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiskCorpusSpec {
    pub speakers: usize,
    pub per_emotion_per_speaker: usize,
    pub min_seconds: f64,
    pub max_seconds: f64,
    pub sample_rate: u32,
    pub seed: u64,
}

impl Default for DiskCorpusSpec {
    fn default() -> Self {
        Self {
            speakers: 4,
            per_emotion_per_speaker: 2,
            min_seconds: 1.0,
            max_seconds: 1.6,
            sample_rate: 16_000,
            seed: 0,
        }
    }
}

/// Emotion-specific voice and articulation parameters.
struct Persona {
    f0: f64,
    tilt: f64,
    formant: f64,
    opening_gain: f64,
    smile: f64,
}

fn persona(e: Emotion) -> Persona {
    let i = e.index() as f64;
    Persona {
        f0: 110.0 + 22.0 * i,
        tilt: 0.6 + 0.15 * ((i * 1.7).sin() + 1.0),
        formant: 600.0 + 260.0 * i,
        opening_gain: 0.10 + 0.05 * ((i * 2.3).cos() + 1.2),
        smile: 0.12 * (i * 0.9).sin(),
    }
}

/// Neutral 36-point lower face: jaw arc, nostril line, outer and inner lips.
pub fn face_template() -> Vec<[f64; 2]> {
    use std::f64::consts::PI;
    let mut pts = Vec::with_capacity(36);
    for i in 0..11 {
        let theta = PI - PI * i as f64 / 10.0;
        pts.push([theta.cos(), 0.9 * theta.sin()]);
    }
    for i in 0..5 {
        let x = -0.2 + 0.1 * i as f64;
        pts.push([x, -0.35 + 0.05 * (1.0 - (x / 0.2).abs())]);
    }
    for i in 0..12 {
        let a = PI + 2.0 * PI * i as f64 / 12.0;
        pts.push([0.4 * a.cos(), 0.25 + 0.12 * a.sin()]);
    }
    for i in 0..8 {
        let a = PI + 2.0 * PI * i as f64 / 8.0;
        pts.push([0.28 * a.cos(), 0.25 + 0.04 * a.sin()]);
    }
    pts
}

/// Template deformed by mouth opening and lip-corner stretch.
pub fn articulate(opening: f64, smile: f64) -> Vec<[f64; 2]> {
    face_template()
        .into_iter()
        .enumerate()
        .map(|(i, [x, y])| match i {
            // Jaw drops most at the chin.
            0..=10 => [x, y + 0.6 * opening * (1.0 - x.abs())],
            11..=15 => [x, y],
            _ => {
                let below = y > 0.25 + 1e-9;
                let stretch = 1.0 + smile;
                let lift = -0.5 * smile * (x.abs() / 0.4);
                [x * stretch, y + lift + if below { opening } else { 0.0 }]
            }
        })
        .collect()
}

fn envelope(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 {
    let comps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(2.0..6.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.3..1.0),
            )
        })
        .collect();
    move |t: f64| {
        let s: f64 = comps
            .iter()
            .map(|(f, ph, a)| a * (std::f64::consts::TAU * f * t + ph).sin())
            .sum();
        (0.5 + 0.35 * s).clamp(0.0, 1.0)
    }
}

/// Write `wav/`, `landmarks/` and `manifest.csv` under `dir`.
pub fn write_disk_corpus(dir: &Path, spec: &DiskCorpusSpec) -> Result<Vec<UtteranceRecord>> {
    if spec.speakers == 0 || spec.per_emotion_per_speaker == 0 {
        return Err(Error::invalid("disk corpus needs speakers and utterances"));
    }
    if !(0.2..=spec.max_seconds).contains(&spec.min_seconds) {
        return Err(Error::invalid("need 0.2 <= min_seconds <= max_seconds"));
    }
    for sub in ["wav", "landmarks"] {
        let p = dir.join(sub);
        std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rate = spec.sample_rate as f64;
    let mut records = Vec::new();
    for s in 0..spec.speakers {
        let speaker = format!("spk{s}");
        let head_scale = 80.0 + 15.0 * s as f64;
        let head_angle = 0.05 * (s as f64 - 1.5);
        let head_shift = [320.0 + 10.0 * s as f64, 260.0 - 7.0 * s as f64];
        let voice_shift = 1.0 + 0.06 * (s as f64 - 1.5);
        for e in Emotion::ALL {
            let p = persona(e);
            for k in 0..spec.per_emotion_per_speaker {
                let id = format!("{speaker}_{}{k:02}", e.name());
                let secs = rng.random_range(spec.min_seconds..=spec.max_seconds);
                let env = envelope(&mut rng);
                let n = (secs * rate) as usize;
                let f0 = p.f0 * voice_shift;
                let mut phase = 0.0;
                let samples: Vec<f64> = (0..n)
                    .map(|i| {
                        let t = i as f64 / rate;
                        phase += std::f64::consts::TAU * f0 * (1.0 + 0.03 * (5.0 * t).sin()) / rate;
                        let mut v = 0.0;
                        let mut h = 1.0;
                        while h * f0 < 0.45 * rate && h <= 40.0 {
                            let hf = h * f0;
                            let resonance = (-((hf - p.formant) / 400.0).powi(2)).exp();
                            v += (h.powf(-p.tilt) + 0.8 * resonance) * (h * phase).sin();
                            h += 1.0;
                        }
                        let noise: f64 = rng.random_range(-1.0..1.0);
                        0.12 * env(t) * v + 0.003 * noise
                    })
                    .collect();
                let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-9);
                let clip = AudioClip::new(samples.iter().map(|v| 0.8 * v / peak).collect(), spec.sample_rate)?;

                let n_video = (secs * crate::VIDEO_RATE as f64).floor() as usize + 1;
                let track = (0..n_video)
                    .map(|f| {
                        let t = f as f64 / crate::VIDEO_RATE as f64;
                        let opening = p.opening_gain * env(t);
                        let mut shape = LandmarkShape::new(articulate(opening, p.smile))?
                            .similarity(head_scale, head_angle, head_shift);
                        for q in &mut shape.points {
                            q[0] += rng.random_range(-0.2..0.2);
                            q[1] += rng.random_range(-0.2..0.2);
                        }
                        Ok(shape)
                    })
                    .collect::<Result<Vec<_>>>()?;

                let wav_path = dir.join("wav").join(format!("{id}.wav"));
                let landmarks_path = dir.join("landmarks").join(format!("{id}.csv"));
                write_wav(&wav_path, &clip)?;
                write_landmark_csv(&landmarks_path, &track)?;
                records.push(UtteranceRecord {
                    id,
                    speaker: speaker.clone(),
                    emotion: e,
                    wav_path,
                    landmarks_path,
                });
            }
        }
    }
    write_manifest(&dir.join("manifest.csv"), &records)?;
    Ok(records)
}
