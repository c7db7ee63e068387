use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Categorical cross-entropy on softmax probabilities.
    CrossEntropy,
    /// Mean squared error over all output coefficients.
    Mse,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Class(usize),
    Values(Vec<f64>),
}

impl Loss {
    pub fn evaluate(&self, output: &[f64], target: &Target) -> Result<(f64, Vec<f64>)> {
        match (self, target) {
            (Loss::CrossEntropy, Target::Class(k)) => {
                if *k >= output.len() {
                    return Err(Error::invalid(format!(
                        "class {k} out of range for {} outputs",
                        output.len()
                    )));
                }
                let mut one_hot = vec![0.0; output.len()];
                one_hot[*k] = 1.0;
                loss_xent(output, &one_hot)
            }
            (Loss::Mse, Target::Values(t)) => loss_mse(output, t),
            _ => Err(Error::invalid("loss and target kinds do not match")),
        }
    }
}

const PROB_FLOOR: f64 = 1e-15;

/// Cross-entropy of softmax probabilities against a one-hot (or soft) target.
/// The gradient is with respect to the probabilities.
pub fn loss_xent(probs: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if probs.len() != target.len() {
        return Err(Error::mismatch(probs.len(), target.len()));
    }
    let mut loss = 0.0;
    let grad = probs
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let p = p.max(PROB_FLOOR);
            if t != 0.0 {
                loss -= t * p.ln();
            }
            -t / p
        })
        .collect();
    Ok((loss, grad))
}

/// Mean over coefficients of the squared error, and its gradient.
pub fn loss_mse(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::mismatch(target.len(), pred.len()));
    }
    let n = pred.len() as f64;
    let loss = pred.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / n;
    let grad = pred.iter().zip(target).map(|(p, t)| 2.0 * (p - t) / n).collect();
    Ok((loss, grad))
}
