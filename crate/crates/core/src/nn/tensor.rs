use super::Shape3;
use crate::{Error, Result};

/// Dense (height, width, channels) tensor, channel-last.
///
/// Height is the frequency axis and width the time axis for spectral input.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Shape3,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Shape3, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::mismatch(shape.len(), data.len()));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Shape3) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Self {
            shape: Shape3::flat(data.len()),
            data,
        }
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.shape.w + x) * self.shape.c + c
    }

    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.index(y, x, c)]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
