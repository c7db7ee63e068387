//! Emotion-conditioned shape regression: top-two fusion of per-emotion
//! regressors and overlap averaging of their windowed estimates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::audio::{SpectralImage, SpectralSequence};
use crate::emotion::{Emotion, UtteranceDecision};
use crate::nn::{Network, Shape3, Tensor};
use crate::shape::{LandmarkShape, ShapeModelPca, ShapeParams};
use crate::{Error, Result, MEL_BANDS};

/// Anything that maps a spectral image to a `kv`-frame window of shape parameters,
/// optionally conditioned on an emotion.
pub trait WindowRegressor {
    fn kv(&self) -> usize;
    fn params_per_frame(&self) -> usize;
    fn predict_window(&self, emotion: Emotion, image: &SpectralImage) -> Result<Vec<f64>>;
}

/// Spectral image as a (40, Ka, 1) network input.
pub fn image_tensor(image: &SpectralImage) -> Tensor {
    Tensor {
        shape: Shape3::new(MEL_BANDS, image.ka, 1),
        data: image.data.clone(),
    }
}

fn check_output(net: &Network, kv: usize, d: usize) -> Result<()> {
    let out = net.output_shape().len();
    if out != kv * d {
        return Err(Error::mismatch(format!("{} outputs (d={d}, kv={kv})", kv * d), out));
    }
    Ok(())
}

/// One shape regressor per emotion.
#[derive(Debug, Clone)]
pub struct DsrnBank {
    models: BTreeMap<Emotion, Network>,
    kv: usize,
    d: usize,
}

impl DsrnBank {
    pub fn new(models: BTreeMap<Emotion, Network>, kv: usize, d: usize) -> Result<Self> {
        let mut input = None;
        for (e, net) in &models {
            check_output(net, kv, d)?;
            match input {
                None => input = Some(net.input_shape()),
                Some(s) if s != net.input_shape() => {
                    return Err(Error::invalid(format!(
                        "{e} regressor expects {} input, others {s}",
                        net.input_shape()
                    )))
                }
                _ => {}
            }
        }
        Ok(Self { models, kv, d })
    }

    pub fn model(&self, e: Emotion) -> Result<&Network> {
        self.models.get(&e).ok_or_else(|| Error::MissingModel(e.to_string()))
    }

    pub fn emotions(&self) -> impl Iterator<Item = Emotion> + '_ {
        self.models.keys().copied()
    }
}

impl WindowRegressor for DsrnBank {
    fn kv(&self) -> usize {
        self.kv
    }

    fn params_per_frame(&self) -> usize {
        self.d
    }

    fn predict_window(&self, emotion: Emotion, image: &SpectralImage) -> Result<Vec<f64>> {
        Ok(self.model(emotion)?.predict(&image_tensor(image))?.data)
    }
}

/// The emotion-independent baseline: a single regressor for every emotion.
#[derive(Debug, Clone)]
pub struct CombinedRegressor {
    model: Network,
    kv: usize,
    d: usize,
}

impl CombinedRegressor {
    pub fn new(model: Network, kv: usize, d: usize) -> Result<Self> {
        check_output(&model, kv, d)?;
        Ok(Self { model, kv, d })
    }
}

impl WindowRegressor for CombinedRegressor {
    fn kv(&self) -> usize {
        self.kv
    }

    fn params_per_frame(&self) -> usize {
        self.d
    }

    fn predict_window(&self, _: Emotion, image: &SpectralImage) -> Result<Vec<f64>> {
        Ok(self.model.predict(&image_tensor(image))?.data)
    }
}

/// Fused window estimate centred at frame `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimate {
    pub vector: Vec<f64>,
    pub center: usize,
}

/// p* · R(x | e*) + p** · R(x | e**). The runner-up is not evaluated when its weight is zero.
pub fn fuse_estimate<R: WindowRegressor + ?Sized>(
    regressor: &R,
    image: &SpectralImage,
    decision: &UtteranceDecision,
) -> Result<WindowEstimate> {
    let (p1, p2) = (decision.p_star, decision.p_star2);
    if !(p1 >= 0.0 && p2 >= 0.0) || (p1 + p2 - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "fusion weights {p1} and {p2} must be non-negative and sum to 1"
        )));
    }
    let mut vector = regressor.predict_window(decision.e_star, image)?;
    let expected = regressor.kv() * regressor.params_per_frame();
    if vector.len() != expected {
        return Err(Error::mismatch(expected, vector.len()));
    }
    if p2 == 0.0 {
        return Ok(WindowEstimate {
            vector,
            center: image.center,
        });
    }
    let second = regressor.predict_window(decision.e_star2, image)?;
    if second.len() != expected {
        return Err(Error::mismatch(expected, second.len()));
    }
    for (a, b) in vector.iter_mut().zip(&second) {
        *a = p1 * *a + p2 * b;
    }
    Ok(WindowEstimate {
        vector,
        center: image.center,
    })
}

/// Per-frame shape parameters at 100 Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeTrack {
    pub frames: Vec<ShapeParams>,
}

impl ShapeTrack {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Number of window estimates that cover frame `j` in a length-`n` sequence.
pub fn contributor_count(n: usize, j: usize, kv: usize) -> usize {
    let delta = kv / 2;
    let lo = j.saturating_sub(delta);
    let hi = (j + delta).min(n - 1);
    hi - lo + 1
}

/// Average, for every frame, the blocks of all window estimates covering it.
///
/// `estimates[i]` must be centred at frame `i`. Edge frames average over the
/// windows that exist rather than dividing by `kv`.
pub fn overlap_average(estimates: &[WindowEstimate], kv: usize) -> Result<ShapeTrack> {
    let delta = crate::window::half_width(kv)?;
    let n = estimates.len();
    if n == 0 {
        return Err(Error::invalid("no window estimates to average"));
    }
    let width = estimates[0].vector.len();
    if !width.is_multiple_of(kv) {
        return Err(Error::invalid(format!(
            "window length {width} is not a multiple of kv={kv}"
        )));
    }
    let d = width / kv;
    for (i, e) in estimates.iter().enumerate() {
        if e.center != i {
            return Err(Error::invalid(format!("estimate {i} is centred at {}", e.center)));
        }
        if e.vector.len() != width {
            return Err(Error::mismatch(width, e.vector.len()));
        }
    }
    let frames = (0..n)
        .map(|j| {
            let lo = j.saturating_sub(delta);
            let hi = (j + delta).min(n - 1);
            let mut acc = vec![0.0; d];
            for (i, est) in estimates.iter().enumerate().take(hi + 1).skip(lo) {
                // Window i holds frame j at block offset j - i + delta.
                let off = j + delta - i;
                for (a, v) in acc.iter_mut().zip(&est.vector[off * d..(off + 1) * d]) {
                    *a += v;
                }
            }
            let count = (hi - lo + 1) as f64;
            ShapeParams {
                coeffs: acc.into_iter().map(|a| a / count).collect(),
            }
        })
        .collect();
    Ok(ShapeTrack { frames })
}

/// Result of driving the regressors over a whole utterance.
#[derive(Debug, Clone)]
pub struct Animation {
    pub track: ShapeTrack,
    pub landmarks: Vec<LandmarkShape>,
}

/// Spectral windows -> fused estimates -> overlap average -> landmarks.
pub fn animate<R: WindowRegressor + ?Sized>(
    regressor: &R,
    seq: &SpectralSequence,
    ka: usize,
    decision: &UtteranceDecision,
    pca: &ShapeModelPca,
) -> Result<Animation> {
    if regressor.params_per_frame() != pca.d {
        return Err(Error::mismatch(
            format!("{} shape parameters", pca.d),
            regressor.params_per_frame(),
        ));
    }
    if seq.is_empty() {
        return Err(Error::invalid("empty spectral sequence"));
    }
    let estimates = (0..seq.len())
        .map(|j| fuse_estimate(regressor, &seq.window(j, ka)?, decision))
        .collect::<Result<Vec<_>>>()?;
    let track = overlap_average(&estimates, regressor.kv())?;
    let landmarks = track
        .frames
        .iter()
        .map(|p| pca.reconstruct(p))
        .collect::<Result<_>>()?;
    Ok(Animation { track, landmarks })
}

/// Arg-max emotion of the classifier for every frame of an utterance.
pub fn predict_frame_emotions(
    dern: &Network,
    seq: &SpectralSequence,
    ka: usize,
) -> Result<Vec<Emotion>> {
    (0..seq.len())
        .map(|j| {
            let probs = dern.predict(&image_tensor(&seq.window(j, ka)?))?.data;
            let mut best = 0;
            for (i, &p) in probs.iter().enumerate() {
                if p > probs[best] {
                    best = i;
                }
            }
            Emotion::from_index(best)
        })
        .collect()
}
