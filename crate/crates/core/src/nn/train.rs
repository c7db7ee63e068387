use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Adam, AdamConfig, Loss, Network, Target, Tensor};
use crate::{Error, Result};

/// Random-access supervised examples.
pub trait Dataset {
    fn len(&self) -> usize;

    fn example(&self, i: usize) -> Result<(Tensor, Target)>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Seeds shuffling and dropout.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 64,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

/// Mini-batch Adam training. Batches are visited in a seeded random order;
/// gradients are averaged over each batch.
pub fn train<D: Dataset + ?Sized>(
    net: &mut Network,
    data: &D,
    validation: Option<&D>,
    loss: Loss,
    cfg: &TrainConfig,
) -> Result<Vec<EpochLog>> {
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch_size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = Adam::new(cfg.adam, net.params().iter().map(|p| p.len()));
    let mut grads = net.zero_gradients();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            for &i in batch {
                let (x, target) = data.example(i)?;
                let out = net.forward_train(&x, &mut rng)?;
                let (l, g) = loss.evaluate(&out.data, &target)?;
                total += l;
                net.backward(&Tensor::vector(g), &mut grads)?;
            }
            grads.scale(1.0 / batch.len() as f64);
            opt.step(&mut net.params_mut(), &grads.0)?;
        }
        let train_loss = total / data.len() as f64;
        if !train_loss.is_finite() {
            return Err(Error::Degenerate(format!("training diverged at epoch {epoch}")));
        }
        let val_loss = validation
            .filter(|v| !v.is_empty())
            .map(|v| evaluate_loss(net, v, loss))
            .transpose()?;
        log::debug!("epoch {epoch}: train {train_loss:.6} val {val_loss:?}");
        log.push(EpochLog {
            epoch,
            train_loss,
            val_loss,
        });
    }
    Ok(log)
}

/// Mean inference-mode loss over a dataset.
pub fn evaluate_loss<D: Dataset + ?Sized>(net: &Network, data: &D, loss: Loss) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("evaluation set is empty"));
    }
    let mut total = 0.0;
    for i in 0..data.len() {
        let (x, target) = data.example(i)?;
        total += loss.evaluate(&net.predict(&x)?.data, &target)?.0;
    }
    Ok(total / data.len() as f64)
}
