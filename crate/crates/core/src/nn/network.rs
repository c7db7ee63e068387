use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layer::{Cache, Layer};
use super::{LayerSpec, Shape3, Tensor};
use crate::{Error, Result};

/// Gradient buffers, one per parameter tensor in [`Network::params`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Vec<f64>>);

impl Gradients {
    pub fn scale(&mut self, k: f64) {
        self.0.iter_mut().flatten().for_each(|g| *g *= k);
    }

    pub fn clear(&mut self) {
        self.0.iter_mut().flatten().for_each(|g| *g = 0.0);
    }

    pub fn flat(&self) -> Vec<f64> {
        self.0.iter().flatten().copied().collect()
    }
}

/// A sequential stack of layers with fixed input shape.
#[derive(Debug, Clone)]
pub struct Network {
    input: Shape3,
    layers: Vec<Layer>,
    seed: u64,
    cache: Option<Vec<Cache>>,
}

impl Network {
    /// Build and He-initialize a network; identical seeds give identical weights.
    pub fn new(input: Shape3, specs: &[LayerSpec], seed: u64) -> Result<Self> {
        let mut net = Self::uninitialized(input, specs, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut net.layers {
            layer.init(&mut rng);
        }
        Ok(net)
    }

    /// Same topology with every weight and bias zero.
    pub fn uninitialized(input: Shape3, specs: &[LayerSpec], seed: u64) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        let mut shape = input;
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            let layer = Layer::new(spec.clone(), shape)?;
            shape = layer.output;
            layers.push(layer);
        }
        Ok(Self {
            input,
            layers,
            seed,
            cache: None,
        })
    }

    pub fn input_shape(&self) -> Shape3 {
        self.input
    }

    pub fn output_shape(&self) -> Shape3 {
        self.layers.last().map(|l| l.output).unwrap_or(self.input)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec.clone()).collect()
    }

    /// Output shape after every layer, in order.
    pub fn shape_chain(&self) -> Vec<Shape3> {
        self.layers.iter().map(|l| l.output).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn params(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .filter(|l| l.has_params())
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .filter(|l| l.has_params())
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients(self.params().iter().map(|p| vec![0.0; p.len()]).collect())
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.shape != self.input {
            return Err(Error::mismatch(self.input, x.shape));
        }
        Ok(())
    }

    /// Inference pass: dropout is the identity and nothing is cached.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.forward::<ChaCha8Rng>(&cur, None).0;
        }
        Ok(cur)
    }

    /// Training pass: draws dropout masks from `rng` and caches activations
    /// for the next [`Network::backward`].
    pub fn forward_train(&mut self, x: &Tensor, rng: &mut ChaCha8Rng) -> Result<Tensor> {
        self.check_input(x)?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for layer in &self.layers {
            let (out, cache) = layer.forward(&cur, Some(&mut *rng));
            caches.push(cache);
            cur = out;
        }
        self.cache = Some(caches);
        Ok(cur)
    }

    /// Backpropagate `grad` (dLoss/dOutput), adding parameter gradients into
    /// `grads`. Consumes the cached forward pass and returns dLoss/dInput.
    pub fn backward(&mut self, grad: &Tensor, grads: &mut Gradients) -> Result<Tensor> {
        let caches = self.cache.take().ok_or(Error::MissingCache)?;
        if grad.data.len() != self.output_shape().len() {
            return Err(Error::mismatch(self.output_shape(), grad.shape));
        }
        let mut slot = grads.0.len();
        let mut cur = Tensor {
            shape: self.output_shape(),
            data: grad.data.clone(),
        };
        let mut empty_w: [f64; 0] = [];
        let mut empty_b: [f64; 0] = [];
        for (layer, cache) in self.layers.iter().zip(&caches).rev() {
            cur = if layer.has_params() {
                slot -= 2;
                let (head, tail) = grads.0.split_at_mut(slot + 1);
                layer.backward(&cur, cache, &mut head[slot], &mut tail[0])?
            } else {
                layer.backward(&cur, cache, &mut empty_w, &mut empty_b)?
            };
        }
        Ok(cur)
    }
}
