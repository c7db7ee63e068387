//! Acoustic front end: PCM audio to z-scored MFSC frames and spectral images.

mod frontend;
mod mel;
mod wav;
mod zscore;

pub use frontend::{extract_mfsc, frame_count, resample_linear, FrontendConfig};
pub use mel::{hz_to_mel, mel_filterbank, mel_to_hz, MelFilterbank};
pub use wav::{read_wav, read_wav_bytes, write_wav};
pub use zscore::{fit_zscore, Normalizer};

use serde::{Deserialize, Serialize};

use crate::window::padded_indices;
use crate::{Error, Result, MEL_BANDS};

/// Mono audio with amplitudes nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// One 10 ms frame of log mel energies.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame {
    pub coeffs: [f64; MEL_BANDS],
}

/// An ordered run of MFSC frames for one utterance.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectralSequence {
    #[serde(with = "frames_serde")]
    pub frames: Vec<[f64; MEL_BANDS]>,
}

/// Frames as nested JSON arrays (serde stops deriving fixed arrays at 32).
mod frames_serde {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::MEL_BANDS;

    pub fn serialize<S: Serializer>(frames: &[[f64; MEL_BANDS]], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = frames.iter().map(|f| f.as_slice()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<[f64; MEL_BANDS]>, D::Error> {
        Vec::<Vec<f64>>::deserialize(d)?
            .into_iter()
            .map(|row| {
                let n = row.len();
                row.try_into()
                    .map_err(|_| D::Error::custom(format!("frame has {n} coefficients, expected {MEL_BANDS}")))
            })
            .collect()
    }
}

impl SpectralSequence {
    pub fn new(frames: Vec<[f64; MEL_BANDS]>) -> Result<Self> {
        for (j, f) in frames.iter().enumerate() {
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite coefficient in frame {j}")));
            }
        }
        Ok(Self { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, j: usize) -> SpectralFrame {
        SpectralFrame {
            coeffs: self.frames[j],
        }
    }

    /// Keep only the first `n` frames.
    pub fn truncate(&mut self, n: usize) {
        self.frames.truncate(n);
    }

    /// The `ka`-column spectral image centred at frame `j`.
    pub fn window(&self, j: usize, ka: usize) -> Result<SpectralImage> {
        spectral_window(self, j, ka)
    }
}

/// A 40 x Ka block of consecutive frames centred at `center`.
///
/// Stored band-major: `data[band * ka + column]`, matching the
/// (frequency, time) layout the networks consume.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralImage {
    pub data: Vec<f64>,
    pub ka: usize,
    pub center: usize,
}

impl SpectralImage {
    pub fn get(&self, band: usize, column: usize) -> f64 {
        self.data[band * self.ka + column]
    }

    pub fn column(&self, column: usize) -> [f64; MEL_BANDS] {
        std::array::from_fn(|b| self.get(b, column))
    }
}

/// Slice the spectral image F_j = [f_{j-Δ}, ..., f_j, ..., f_{j+Δ}].
pub fn spectral_window(seq: &SpectralSequence, j: usize, ka: usize) -> Result<SpectralImage> {
    let idx = padded_indices(seq.len(), j, ka)?;
    let mut data = vec![0.0; MEL_BANDS * ka];
    for (c, &src) in idx.iter().enumerate() {
        for (b, &v) in seq.frames[src].iter().enumerate() {
            data[b * ka + c] = v;
        }
    }
    Ok(SpectralImage {
        data,
        ka,
        center: j,
    })
}
