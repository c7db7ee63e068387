use serde::{Deserialize, Serialize};

use super::SpectralSequence;
use crate::{Error, Result, MEL_BANDS};

/// Dimensions whose standard deviation falls below this map to zero.
pub const DEGENERATE_STD: f64 = 1e-8;

/// Corpus-global per-band mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

pub fn fit_zscore<'a, I>(seqs: I) -> Result<Normalizer>
where
    I: IntoIterator<Item = &'a SpectralSequence>,
{
    let mut count = 0usize;
    let mut sum = [0.0; MEL_BANDS];
    let mut frames = Vec::new();
    for seq in seqs {
        for f in &seq.frames {
            for (s, v) in sum.iter_mut().zip(f) {
                *s += v;
            }
            frames.push(f);
            count += 1;
        }
    }
    if count < 2 {
        return Err(Error::invalid(format!(
            "z-score statistics need at least 2 frames, got {count}"
        )));
    }
    let n = count as f64;
    let means: Vec<f64> = sum.iter().map(|s| s / n).collect();
    // Two-pass variance.
    let mut sq = [0.0; MEL_BANDS];
    for f in frames {
        for b in 0..MEL_BANDS {
            let d = f[b] - means[b];
            sq[b] += d * d;
        }
    }
    let stds = sq.iter().map(|s| (s / n).sqrt()).collect();
    Ok(Normalizer { means, stds })
}

impl Normalizer {
    fn check(&self) -> Result<()> {
        if self.means.len() != MEL_BANDS || self.stds.len() != MEL_BANDS {
            return Err(Error::mismatch(
                format!("{MEL_BANDS} means and stds"),
                format!("{} means, {} stds", self.means.len(), self.stds.len()),
            ));
        }
        Ok(())
    }

    pub fn apply(&self, seq: &SpectralSequence) -> Result<SpectralSequence> {
        self.check()?;
        let frames = seq
            .frames
            .iter()
            .map(|f| {
                std::array::from_fn(|b| {
                    if self.stds[b] < DEGENERATE_STD {
                        0.0
                    } else {
                        (f[b] - self.means[b]) / self.stds[b]
                    }
                })
            })
            .collect();
        Ok(SpectralSequence { frames })
    }

    /// Map normalized frames back to log energies. Degenerate bands return their mean.
    pub fn invert(&self, seq: &SpectralSequence) -> Result<SpectralSequence> {
        self.check()?;
        let frames = seq
            .frames
            .iter()
            .map(|f| {
                std::array::from_fn(|b| {
                    if self.stds[b] < DEGENERATE_STD {
                        self.means[b]
                    } else {
                        f[b] * self.stds[b] + self.means[b]
                    }
                })
            })
            .collect();
        Ok(SpectralSequence { frames })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let n: Normalizer = serde_json::from_str(&text)?;
        n.check()?;
        Ok(n)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
