//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Everything crosses the boundary as flat numeric arrays or JSON strings,
//! so the page needs no bundler and no serde glue on the JS side.

use emoface::audio::{extract_mfsc, read_wav_bytes, AudioClip, FrontendConfig};
use emoface::MEL_BANDS;
use emoface::emotion::{decide, TOP_ONE_THRESHOLD};
use emoface::render::frame_svg;
use emoface::shape::{fit_pca, gpa_align, GpaConfig, LandmarkShape, PcaTarget, ShapeModelPca, ShapeParams};
use emoface::synth::articulate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn flatten(clip: &AudioClip) -> Result<Vec<f64>, JsValue> {
    let seq = extract_mfsc(clip, &FrontendConfig::default()).map_err(js_err)?;
    Ok(seq.frames.iter().flatten().copied().collect())
}

/// Log mel energies of a WAV file, frame-major, `MEL_BANDS` values per frame.
#[wasm_bindgen]
pub fn mfsc_from_wav(bytes: &[u8]) -> Result<Vec<f64>, JsValue> {
    flatten(&read_wav_bytes(bytes).map_err(js_err)?)
}

/// Same as [`mfsc_from_wav`] for raw mono samples.
#[wasm_bindgen]
pub fn mfsc_from_samples(samples: Vec<f64>, sample_rate: u32) -> Result<Vec<f64>, JsValue> {
    flatten(&AudioClip::new(samples, sample_rate).map_err(js_err)?)
}

#[wasm_bindgen]
pub fn mel_bands() -> usize {
    MEL_BANDS
}

/// Top-two decision for a 7-way histogram; returns the decision as JSON.
/// The input is renormalized first so sliders need not sum to one.
#[wasm_bindgen]
pub fn decide_top_two(weights: Vec<f64>) -> Result<String, JsValue> {
    if weights.len() != 7 {
        return Err(js_err(format!("expected 7 weights, got {}", weights.len())));
    }
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(js_err("weights must have a positive sum"));
    }
    let mut p = [0.0; 7];
    for (dst, w) in p.iter_mut().zip(&weights) {
        *dst = w / total;
    }
    let d = decide(&p, TOP_ONE_THRESHOLD).map_err(js_err)?;
    serde_json::to_string(&d).map_err(js_err)
}

/// PCA shape space fitted on jittered synthetic mouth articulations.
#[wasm_bindgen]
pub struct ShapeExplorer {
    pca: ShapeModelPca,
    bbox: [f64; 4],
}

#[wasm_bindgen]
impl ShapeExplorer {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64) -> Result<ShapeExplorer, JsValue> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shapes: Vec<LandmarkShape> = (0..200)
            .map(|_| {
                let mut pts = articulate(rng.random_range(0.0..0.35), rng.random_range(-0.15..0.15));
                for p in &mut pts {
                    p[0] += rng.random_range(-0.015..0.015);
                    p[1] += rng.random_range(-0.015..0.015);
                }
                LandmarkShape::new(pts)
            })
            .collect::<emoface::Result<_>>()
            .map_err(js_err)?;
        let (_, aligned) = gpa_align(&shapes, &GpaConfig::default()).map_err(js_err)?;
        let pca = fit_pca(&aligned, PcaTarget::default()).map_err(js_err)?;
        let mean = LandmarkShape::from_vector(&pca.mean).map_err(js_err)?;
        let b = emoface::render::bounds([&mean]);
        let (w, h) = (b[2] - b[0], b[3] - b[1]);
        let bbox = [b[0] - 0.35 * w, b[1] - 0.35 * h, b[2] + 0.35 * w, b[3] + 0.35 * h];
        Ok(ShapeExplorer { pca, bbox })
    }

    pub fn modes(&self) -> usize {
        self.pca.d
    }

    /// Standard deviation of mode `k`, for scaling sliders.
    pub fn mode_std(&self, k: usize) -> f64 {
        self.pca.eigenvalues.get(k).map_or(0.0, |v| v.max(0.0).sqrt())
    }

    pub fn variance_covered(&self) -> f64 {
        self.pca.variance_covered
    }

    /// SVG of the shape for coefficients given in units of each mode's std.
    pub fn render(&self, sigmas: Vec<f64>, size: f64) -> Result<String, JsValue> {
        let coeffs = (0..self.pca.d).map(|k| sigmas.get(k).copied().unwrap_or(0.0) * self.mode_std(k)).collect();
        let shape = self.pca.reconstruct(&ShapeParams { coeffs }).map_err(js_err)?;
        Ok(frame_svg(&shape, self.bbox, size))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrogram_has_whole_frames() {
        let v = mfsc_from_samples(vec![0.1; 16_000], 16_000).unwrap();
        assert_eq!(v.len(), 98 * MEL_BANDS);
    }

    #[test]
    fn decision_json_round_trip() {
        let d: serde_json::Value = serde_json::from_str(&decide_top_two(vec![5.0, 3.0, 2.0, 0.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!((d["p_star"].as_f64().unwrap() - 0.625).abs() < 1e-12);
    }

    #[test]
    fn mean_shape_renders() {
        let ex = ShapeExplorer::new(1).unwrap();
        assert_eq!(ex.modes(), 18);
        assert!(ex.render(vec![], 200.0).unwrap().starts_with("<svg"));
        assert!(ex.mode_std(0) >= ex.mode_std(1));
    }
}
