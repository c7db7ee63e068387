//! Emotion-dependent vs combined shape regression on the synthetic corpus.
//!
//! Utterances are split per emotion (every fifth round of the seven-emotion
//! cycle goes to validation). Seven regressors trained on single emotions are
//! compared with one regressor of identical architecture trained on all data,
//! and the full cascade is scored with oracle, predicted and no emotion routing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{ExampleKind, FeatureUtterance, WindowDataset};
use crate::emotion::{Emotion, UtteranceDecision, EMOTION_COUNT};
use crate::nn::{evaluate_loss, DernConfig, DsrnConfig, Loss};
use crate::pipeline::{shape_errors, train_dern, train_dsrn, utterance_decision, NetSection};
use crate::regression::{CombinedRegressor, DsrnBank};
use crate::synth::{generate, SyntheticSpec};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub spec: SyntheticSpec,
    pub dern: NetSection<DernConfig>,
    pub dsrn: NetSection<DsrnConfig>,
}

impl Default for BenchConfig {
    /// Reduced widths; 21 000 frames.
    fn default() -> Self {
        let mut dern = NetSection::<DernConfig>::default();
        dern.arch.conv_depths = [4, 8, 8];
        dern.arch.fc_units = 32;
        dern.train.epochs = 2;
        let mut dsrn = NetSection::<DsrnConfig>::default();
        dsrn.arch.conv_depths = [4, 8, 8, 8];
        dsrn.arch.fc_units = [64, 32];
        dsrn.arch.dropout = 0.1;
        dsrn.train.epochs = 10;
        dsrn.train.batch_size = 32;
        Self {
            spec: SyntheticSpec::default(),
            dern,
            dsrn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedMse {
    pub dependent: f64,
    pub combined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub frames: usize,
    /// Validation MSE (training objective) on each emotion's data.
    pub per_emotion: BTreeMap<Emotion, PairedMse>,
    pub mean_dependent: f64,
    pub mean_combined: f64,
    /// 1 - dependent / combined.
    pub reduction: f64,
    pub dern_accuracy: f64,
    /// Per-coefficient window MSE over all validation utterances.
    pub oracle: f64,
    pub predicted: f64,
    pub all_combined: f64,
}

impl BenchReport {
    /// oracle <= predicted <= all-combined, allowing `tol` of noise on each gap.
    pub fn cascade_ordered(&self, tol: f64) -> bool {
        self.oracle <= self.predicted + tol && self.predicted <= self.all_combined + tol
    }
}

/// Validation partition used by the benchmark.
pub fn is_validation(utterance_index: usize) -> bool {
    (utterance_index / EMOTION_COUNT) % 5 == 4
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    let corpus = generate(&cfg.spec)?;
    let (ka, kv, seed) = (cfg.spec.ka, cfg.spec.kv, cfg.spec.seed);
    let (mut train, mut val): (Vec<FeatureUtterance>, Vec<FeatureUtterance>) = (Vec::new(), Vec::new());
    for (i, u) in corpus.utterances.into_iter().enumerate() {
        if is_validation(i) {
            val.push(u);
        } else {
            train.push(u);
        }
    }
    let frames = train.iter().chain(&val).map(FeatureUtterance::len).sum();

    let (dern, _) = train_dern(&train, &[], ka, &cfg.dern, seed)?;
    let (combined_net, _) = train_dsrn(&train, &[], None, ka, kv, &cfg.dsrn, seed)?;
    let mut models = BTreeMap::new();
    let mut per_emotion = BTreeMap::new();
    for e in Emotion::ALL {
        let (net, _) = train_dsrn(&train, &[], Some(e), ka, kv, &cfg.dsrn, seed)?;
        let data = WindowDataset::new(&val, |u| u.emotion == e, ka, kv, ExampleKind::Shape);
        per_emotion.insert(
            e,
            PairedMse {
                dependent: evaluate_loss(&net, &data, Loss::Mse)?,
                combined: evaluate_loss(&combined_net, &data, Loss::Mse)?,
            },
        );
        models.insert(e, net);
    }
    let n = per_emotion.len() as f64;
    let mean_dependent = per_emotion.values().map(|p| p.dependent).sum::<f64>() / n;
    let mean_combined = per_emotion.values().map(|p| p.combined).sum::<f64>() / n;

    let d = cfg.spec.d;
    let bank = DsrnBank::new(models, kv, d)?;
    let combined = CombinedRegressor::new(combined_net, kv, d)?;
    let predicted: Vec<_> = val
        .iter()
        .map(|u| utterance_decision(&dern, &u.mfsc, ka))
        .collect::<Result<_>>()?;
    let oracle: Vec<_> = val.iter().map(|u| UtteranceDecision::certain(u.emotion)).collect();
    let correct = val.iter().zip(&predicted).filter(|(u, p)| p.e_star == u.emotion).count();

    Ok(BenchReport {
        seed,
        frames,
        per_emotion,
        mean_dependent,
        mean_combined,
        reduction: 1.0 - mean_dependent / mean_combined,
        dern_accuracy: correct as f64 / val.len() as f64,
        oracle: shape_errors(&bank, &val, &oracle, ka)?.per_coefficient,
        predicted: shape_errors(&bank, &val, &predicted, ka)?.per_coefficient,
        all_combined: shape_errors(&combined, &val, &oracle, ka)?.per_coefficient,
    })
}
