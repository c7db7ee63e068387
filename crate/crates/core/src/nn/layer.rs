use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape3 {
    pub h: usize,
    pub w: usize,
    pub c: usize,
}

impl Shape3 {
    pub const fn new(h: usize, w: usize, c: usize) -> Self {
        Self { h, w, c }
    }

    pub const fn flat(n: usize) -> Self {
        Self { h: 1, w: 1, c: n }
    }

    pub const fn len(&self) -> usize {
        self.h * self.w * self.c
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Display for Shape3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.h, self.w, self.c)
    }
}

/// Layer configuration as listed in an architecture table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Stride-1 cross-correlation with zero "same" padding.
    Conv { filters: usize, kh: usize, kw: usize },
    /// Max pooling with "same" padding: output = ceil(input / stride).
    MaxPool { ph: usize, pw: usize, sh: usize, sw: usize },
    Relu,
    Flatten,
    Dense { units: usize },
    /// Inverted dropout; identity outside training.
    Dropout { rate: f64 },
    Softmax,
}

impl LayerSpec {
    pub fn output_shape(&self, input: Shape3) -> Result<Shape3> {
        match *self {
            LayerSpec::Conv { filters, kh, kw } => {
                if filters == 0 || kh == 0 || kw == 0 {
                    return Err(Error::invalid("conv filters and kernel must be positive"));
                }
                Ok(Shape3::new(input.h, input.w, filters))
            }
            LayerSpec::MaxPool { ph, pw, sh, sw } => {
                if ph == 0 || pw == 0 || sh == 0 || sw == 0 {
                    return Err(Error::invalid("pool window and stride must be positive"));
                }
                Ok(Shape3::new(input.h.div_ceil(sh), input.w.div_ceil(sw), input.c))
            }
            LayerSpec::Relu | LayerSpec::Softmax => Ok(input),
            LayerSpec::Dropout { rate } => {
                if !(0.0..1.0).contains(&rate) {
                    return Err(Error::invalid(format!("dropout rate {rate} outside [0, 1)")));
                }
                Ok(input)
            }
            LayerSpec::Flatten => Ok(Shape3::flat(input.len())),
            LayerSpec::Dense { units } => {
                if units == 0 {
                    return Err(Error::invalid("dense layer needs at least one unit"));
                }
                Ok(Shape3::flat(units))
            }
        }
    }

    /// (weight count, bias count) for the given input shape.
    pub fn param_counts(&self, input: Shape3) -> (usize, usize) {
        match *self {
            LayerSpec::Conv { filters, kh, kw } => (filters * kh * kw * input.c, filters),
            LayerSpec::Dense { units } => (units * input.len(), units),
            _ => (0, 0),
        }
    }

    pub fn fan_in(&self, input: Shape3) -> usize {
        match *self {
            LayerSpec::Conv { kh, kw, .. } => kh * kw * input.c,
            LayerSpec::Dense { .. } => input.len(),
            _ => 0,
        }
    }
}

/// Per-layer state kept from a training forward pass.
#[derive(Debug, Clone)]
pub(crate) enum Cache {
    Input(Tensor),
    Argmax(Vec<usize>),
    Mask(Vec<f64>),
    Output(Tensor),
    None,
}

/// Leading padding for "same" convolution/pooling along one axis.
fn same_pad(input: usize, k: usize, stride: usize) -> usize {
    let out = input.div_ceil(stride);
    ((out - 1) * stride + k).saturating_sub(input) / 2
}

#[derive(Debug, Clone)]
pub(crate) struct Layer {
    pub spec: LayerSpec,
    pub input: Shape3,
    pub output: Shape3,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn new(spec: LayerSpec, input: Shape3) -> Result<Self> {
        let output = spec.output_shape(input)?;
        let (nw, nb) = spec.param_counts(input);
        Ok(Self {
            spec,
            input,
            output,
            weights: vec![0.0; nw],
            bias: vec![0.0; nb],
        })
    }

    pub fn has_params(&self) -> bool {
        !self.weights.is_empty()
    }

    /// He-uniform weights, zero biases.
    pub fn init<R: Rng>(&mut self, rng: &mut R) {
        if !self.has_params() {
            return;
        }
        let limit = (6.0 / self.spec.fan_in(self.input) as f64).sqrt();
        for w in &mut self.weights {
            *w = rng.random_range(-limit..limit);
        }
        self.bias.iter_mut().for_each(|b| *b = 0.0);
    }

    pub fn forward<R: Rng>(&self, x: &Tensor, train: Option<&mut R>) -> (Tensor, Cache) {
        let keep = train.is_some();
        match self.spec {
            LayerSpec::Conv { filters, kh, kw } => {
                let out = self.conv_forward(x, filters, kh, kw);
                (out, if keep { Cache::Input(x.clone()) } else { Cache::None })
            }
            LayerSpec::MaxPool { ph, pw, sh, sw } => {
                let (out, arg) = self.pool_forward(x, ph, pw, sh, sw);
                (out, if keep { Cache::Argmax(arg) } else { Cache::None })
            }
            LayerSpec::Relu => {
                let data = x.data.iter().map(|&v| v.max(0.0)).collect();
                let cache = if keep {
                    Cache::Mask(x.data.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect())
                } else {
                    Cache::None
                };
                (Tensor { shape: x.shape, data }, cache)
            }
            LayerSpec::Flatten => (Tensor::vector(x.data.clone()), Cache::None),
            LayerSpec::Dense { units } => {
                let n_in = x.data.len();
                let data = (0..units)
                    .map(|o| {
                        let row = &self.weights[o * n_in..(o + 1) * n_in];
                        self.bias[o] + dot(row, &x.data)
                    })
                    .collect();
                let cache = if keep { Cache::Input(x.clone()) } else { Cache::None };
                (Tensor::vector(data), cache)
            }
            LayerSpec::Dropout { rate } => match train {
                Some(rng) if rate > 0.0 => {
                    let scale = 1.0 / (1.0 - rate);
                    let mask: Vec<f64> = (0..x.data.len())
                        .map(|_| if rng.random::<f64>() >= rate { scale } else { 0.0 })
                        .collect();
                    let data = x.data.iter().zip(&mask).map(|(v, m)| v * m).collect();
                    (Tensor { shape: x.shape, data }, Cache::Mask(mask))
                }
                Some(_) => (x.clone(), Cache::Mask(vec![1.0; x.data.len()])),
                None => (x.clone(), Cache::None),
            },
            LayerSpec::Softmax => {
                let max = x.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = x.data.iter().map(|v| (v - max).exp()).collect();
                let sum: f64 = exps.iter().sum();
                let out = Tensor {
                    shape: x.shape,
                    data: exps.iter().map(|e| e / sum).collect(),
                };
                let cache = if keep { Cache::Output(out.clone()) } else { Cache::None };
                (out, cache)
            }
        }
    }

    /// Returns the input gradient, accumulating parameter gradients into `gw`/`gb`.
    pub fn backward(
        &self,
        grad: &Tensor,
        cache: &Cache,
        gw: &mut [f64],
        gb: &mut [f64],
    ) -> Result<Tensor> {
        match (&self.spec, cache) {
            (LayerSpec::Conv { filters, kh, kw }, Cache::Input(x)) => {
                Ok(self.conv_backward(x, grad, *filters, *kh, *kw, gw, gb))
            }
            (LayerSpec::MaxPool { .. }, Cache::Argmax(arg)) => {
                let mut gx = Tensor::zeros(self.input);
                for (g, &src) in grad.data.iter().zip(arg) {
                    gx.data[src] += g;
                }
                Ok(gx)
            }
            (LayerSpec::Relu, Cache::Mask(mask)) | (LayerSpec::Dropout { .. }, Cache::Mask(mask)) => {
                Ok(Tensor {
                    shape: self.input,
                    data: grad.data.iter().zip(mask).map(|(g, m)| g * m).collect(),
                })
            }
            (LayerSpec::Flatten, _) => Tensor::new(self.input, grad.data.clone()),
            (LayerSpec::Dense { units }, Cache::Input(x)) => {
                let n_in = x.data.len();
                let mut gx = vec![0.0; n_in];
                for o in 0..*units {
                    let g = grad.data[o];
                    gb[o] += g;
                    if g == 0.0 {
                        continue;
                    }
                    let row = &self.weights[o * n_in..(o + 1) * n_in];
                    let grow = &mut gw[o * n_in..(o + 1) * n_in];
                    for i in 0..n_in {
                        grow[i] += g * x.data[i];
                        gx[i] += g * row[i];
                    }
                }
                Tensor::new(self.input, gx)
            }
            (LayerSpec::Softmax, Cache::Output(y)) => {
                // dL/dx_i = y_i (g_i - sum_k g_k y_k)
                let s = dot(&grad.data, &y.data);
                Ok(Tensor {
                    shape: self.input,
                    data: y.data.iter().zip(&grad.data).map(|(yi, gi)| yi * (gi - s)).collect(),
                })
            }
            _ => Err(Error::MissingCache),
        }
    }

    /// Weights reordered to [ky][kx][in][out] so the innermost loops run over
    /// contiguous filters.
    fn conv_weights_by_tap(&self, filters: usize) -> Vec<f64> {
        let per_filter = self.weights.len() / filters;
        let mut t = vec![0.0; self.weights.len()];
        for f in 0..filters {
            for k in 0..per_filter {
                t[k * filters + f] = self.weights[f * per_filter + k];
            }
        }
        t
    }

    fn conv_forward(&self, x: &Tensor, filters: usize, kh: usize, kw: usize) -> Tensor {
        let Shape3 { h, w, c } = self.input;
        let (pt, pl) = (same_pad(h, kh, 1), same_pad(w, kw, 1));
        let wt = self.conv_weights_by_tap(filters);
        let mut out = Tensor::zeros(self.output);
        for oy in 0..h {
            for ox in 0..w {
                let base = (oy * w + ox) * filters;
                let acc = &mut out.data[base..base + filters];
                acc.copy_from_slice(&self.bias);
                for ky in 0..kh {
                    let Some(iy) = (oy + ky).checked_sub(pt).filter(|&v| v < h) else {
                        continue;
                    };
                    for kx in 0..kw {
                        let Some(ix) = (ox + kx).checked_sub(pl).filter(|&v| v < w) else {
                            continue;
                        };
                        let xs = &x.data[(iy * w + ix) * c..(iy * w + ix + 1) * c];
                        let k_off = (ky * kw + kx) * c;
                        for (i, &xv) in xs.iter().enumerate() {
                            let ws = &wt[(k_off + i) * filters..(k_off + i + 1) * filters];
                            for (a, wv) in acc.iter_mut().zip(ws) {
                                *a += xv * wv;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn conv_backward(
        &self,
        x: &Tensor,
        grad: &Tensor,
        filters: usize,
        kh: usize,
        kw: usize,
        gw: &mut [f64],
        gb: &mut [f64],
    ) -> Tensor {
        let Shape3 { h, w, c } = self.input;
        let (pt, pl) = (same_pad(h, kh, 1), same_pad(w, kw, 1));
        let wt = self.conv_weights_by_tap(filters);
        let mut gwt = vec![0.0; wt.len()];
        let mut gx = Tensor::zeros(self.input);
        for oy in 0..h {
            for ox in 0..w {
                let g = &grad.data[(oy * w + ox) * filters..(oy * w + ox + 1) * filters];
                for (b, gv) in gb.iter_mut().zip(g) {
                    *b += gv;
                }
                for ky in 0..kh {
                    let Some(iy) = (oy + ky).checked_sub(pt).filter(|&v| v < h) else {
                        continue;
                    };
                    for kx in 0..kw {
                        let Some(ix) = (ox + kx).checked_sub(pl).filter(|&v| v < w) else {
                            continue;
                        };
                        let xo = (iy * w + ix) * c;
                        let k_off = (ky * kw + kx) * c;
                        for i in 0..c {
                            let row = (k_off + i) * filters..(k_off + i + 1) * filters;
                            gx.data[xo + i] += dot(g, &wt[row.clone()]);
                            let xv = x.data[xo + i];
                            for (gwv, gv) in gwt[row].iter_mut().zip(g) {
                                *gwv += xv * gv;
                            }
                        }
                    }
                }
            }
        }
        let per_filter = wt.len() / filters;
        for f in 0..filters {
            for k in 0..per_filter {
                gw[f * per_filter + k] += gwt[k * filters + f];
            }
        }
        gx
    }

    fn pool_forward(
        &self,
        x: &Tensor,
        ph: usize,
        pw: usize,
        sh: usize,
        sw: usize,
    ) -> (Tensor, Vec<usize>) {
        let Shape3 { h, w, c } = self.input;
        let (pt, pl) = (same_pad(h, ph, sh), same_pad(w, pw, sw));
        let mut out = Tensor::zeros(self.output);
        let mut arg = vec![0; self.output.len()];
        for oy in 0..self.output.h {
            for ox in 0..self.output.w {
                for ch in 0..c {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_i = usize::MAX;
                    for ky in 0..ph {
                        let Some(iy) = (oy * sh + ky).checked_sub(pt).filter(|&v| v < h) else {
                            continue;
                        };
                        for kx in 0..pw {
                            let Some(ix) = (ox * sw + kx).checked_sub(pl).filter(|&v| v < w)
                            else {
                                continue;
                            };
                            let i = (iy * w + ix) * c + ch;
                            if x.data[i] > best || best_i == usize::MAX {
                                best = x.data[i];
                                best_i = i;
                            }
                        }
                    }
                    let o = out.index(oy, ox, ch);
                    out.data[o] = best;
                    arg[o] = best_i;
                }
            }
        }
        (out, arg)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_padding_amounts() {
        assert_eq!(same_pad(40, 5, 1), 2);
        assert_eq!(same_pad(40, 3, 2), 0);
        assert_eq!(same_pad(15, 3, 2), 1);
        assert_eq!(same_pad(5, 2, 2), 0);
    }

    #[test]
    fn pool_output_is_ceil_division() {
        let spec = LayerSpec::MaxPool { ph: 3, pw: 3, sh: 2, sw: 2 };
        assert_eq!(spec.output_shape(Shape3::new(40, 15, 32)).unwrap(), Shape3::new(20, 8, 32));
        let spec = LayerSpec::MaxPool { ph: 2, pw: 1, sh: 2, sw: 1 };
        assert_eq!(spec.output_shape(Shape3::new(5, 15, 128)).unwrap(), Shape3::new(3, 15, 128));
    }

    #[test]
    fn bad_configs() {
        assert!(LayerSpec::Dropout { rate: 1.0 }.output_shape(Shape3::flat(3)).is_err());
        assert!(LayerSpec::Conv { filters: 0, kh: 3, kw: 3 }.output_shape(Shape3::flat(3)).is_err());
        assert!(LayerSpec::MaxPool { ph: 2, pw: 2, sh: 0, sw: 1 }.output_shape(Shape3::flat(3)).is_err());
    }

    #[test]
    fn maxpool_picks_max() {
        let layer = Layer::new(
            LayerSpec::MaxPool { ph: 2, pw: 2, sh: 2, sw: 2 },
            Shape3::new(2, 2, 1),
        )
        .unwrap();
        let x = Tensor::new(Shape3::new(2, 2, 1), vec![1.0, 4.0, -2.0, 3.0]).unwrap();
        let (y, _) = layer.forward::<rand_chacha::ChaCha8Rng>(&x, None);
        assert_eq!(y.data, vec![4.0]);
    }
}
