use crate::{Error, Result};

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filters sampled at FFT bin frequencies.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// `weights[band][bin]`, `n_fft / 2 + 1` bins per band.
    pub weights: Vec<Vec<f64>>,
    /// Band edges in Hz: `n_bands + 2` points, band `k` spans `edges[k]..edges[k + 2]`.
    pub edges_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn n_bands(&self) -> usize {
        self.weights.len()
    }

    pub fn center_hz(&self, band: usize) -> f64 {
        self.edges_hz[band + 1]
    }

    /// Band energies of a one-sided power spectrum.
    pub fn apply(&self, power: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.weights) {
            *o = row.iter().zip(power).map(|(w, p)| w * p).sum();
        }
    }
}

/// Build `n_bands` triangles equally spaced in mel between `low_hz` and `high_hz`.
///
/// Weights are evaluated at the exact bin frequencies rather than snapping
/// band edges to bins, so narrow low-frequency bands never collapse.
pub fn mel_filterbank(
    n_bands: usize,
    n_fft: usize,
    sample_rate: f64,
    low_hz: f64,
    high_hz: f64,
) -> Result<MelFilterbank> {
    if n_bands == 0 || n_fft < 2 {
        return Err(Error::invalid("filterbank needs at least one band and two FFT points"));
    }
    if !(0.0 <= low_hz && low_hz < high_hz) {
        return Err(Error::invalid(format!(
            "invalid mel band range {low_hz}..{high_hz} Hz"
        )));
    }
    if high_hz > sample_rate / 2.0 + 1e-9 {
        return Err(Error::invalid(format!(
            "highest mel band edge {high_hz} Hz exceeds Nyquist of {sample_rate} Hz audio"
        )));
    }
    let (lo, hi) = (hz_to_mel(low_hz), hz_to_mel(high_hz));
    let edges_hz: Vec<f64> = (0..n_bands + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_bands + 1) as f64))
        .collect();
    let n_bins = n_fft / 2 + 1;
    let bin_hz = sample_rate / n_fft as f64;
    let weights = (0..n_bands)
        .map(|k| {
            let (l, c, r) = (edges_hz[k], edges_hz[k + 1], edges_hz[k + 2]);
            (0..n_bins)
                .map(|bin| {
                    let f = bin as f64 * bin_hz;
                    let rise = (f - l) / (c - l);
                    let fall = (r - f) / (r - c);
                    rise.min(fall).max(0.0)
                })
                .collect()
        })
        .collect();
    Ok(MelFilterbank { weights, edges_hz })
}
