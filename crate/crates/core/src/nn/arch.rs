//! Layer stacks for the two networks. Kernel and pooling geometry is fixed;
//! depths and dense widths are configurable so experiments can shrink them.

use serde::{Deserialize, Serialize};

use super::LayerSpec;
use crate::{Error, Result};

/// Emotion classifier: three 5x5 conv + 3x3/2 pool blocks, dense, dropout, softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DernConfig {
    pub conv_depths: [usize; 3],
    pub fc_units: usize,
    pub dropout: f64,
    pub classes: usize,
}

impl Default for DernConfig {
    fn default() -> Self {
        Self {
            conv_depths: [32, 64, 128],
            fc_units: 256,
            dropout: 0.5,
            classes: 7,
        }
    }
}

pub fn dern_layers(cfg: &DernConfig) -> Vec<LayerSpec> {
    let mut layers = Vec::new();
    for &depth in &cfg.conv_depths {
        layers.push(LayerSpec::Conv { filters: depth, kh: 5, kw: 5 });
        layers.push(LayerSpec::Relu);
        layers.push(LayerSpec::MaxPool { ph: 3, pw: 3, sh: 2, sw: 2 });
    }
    layers.extend([
        LayerSpec::Flatten,
        LayerSpec::Dense { units: cfg.fc_units },
        LayerSpec::Relu,
        LayerSpec::Dropout { rate: cfg.dropout },
        LayerSpec::Dense { units: cfg.classes },
        LayerSpec::Softmax,
    ]);
    layers
}

/// Shape regressor: four frequency-only conv/pool blocks, two dense layers
/// with dropout, and a linear multi-output head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsrnConfig {
    pub conv_depths: [usize; 4],
    pub fc_units: [usize; 2],
    pub dropout: f64,
}

impl Default for DsrnConfig {
    fn default() -> Self {
        Self {
            conv_depths: [32, 64, 128, 128],
            fc_units: [1024, 500],
            dropout: 0.5,
        }
    }
}

/// (kernel height, pool height) per block; widths and time strides are all 1.
const DSRN_BLOCKS: [(usize, usize); 4] = [(5, 3), (5, 3), (5, 2), (3, 2)];

pub fn dsrn_layers(cfg: &DsrnConfig, outputs: usize) -> Result<Vec<LayerSpec>> {
    if outputs == 0 {
        return Err(Error::invalid("regressor needs at least one output"));
    }
    let mut layers = Vec::new();
    for (&depth, &(k, p)) in cfg.conv_depths.iter().zip(&DSRN_BLOCKS) {
        layers.push(LayerSpec::Conv { filters: depth, kh: k, kw: 1 });
        layers.push(LayerSpec::Relu);
        layers.push(LayerSpec::MaxPool { ph: p, pw: 1, sh: 2, sw: 1 });
    }
    layers.push(LayerSpec::Flatten);
    for &units in &cfg.fc_units {
        layers.push(LayerSpec::Dense { units });
        layers.push(LayerSpec::Relu);
        layers.push(LayerSpec::Dropout { rate: cfg.dropout });
    }
    layers.push(LayerSpec::Dense { units: outputs });
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dsrn_is_frequency_only() {
        for layer in dsrn_layers(&DsrnConfig::default(), 90).unwrap() {
            match layer {
                LayerSpec::Conv { kw, .. } => assert_eq!(kw, 1),
                LayerSpec::MaxPool { pw, sw, .. } => assert_eq!((pw, sw), (1, 1)),
                _ => {}
            }
        }
    }

    #[test]
    fn dern_has_one_dropout() {
        let n = dern_layers(&DernConfig::default())
            .iter()
            .filter(|l| matches!(l, LayerSpec::Dropout { .. }))
            .count();
        assert_eq!(n, 1);
    }
}
