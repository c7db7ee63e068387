//! Statistical lower-face shape model: landmark I/O, Procrustes alignment,
//! PCA, temporal resampling and shape-parameter windows.

mod gpa;
mod io;
mod pca;
mod resample;

pub use gpa::{gpa_align, procrustes_distance, AlignmentModel, GpaConfig};
pub use io::{read_landmark_csv, write_landmark_csv};
pub use pca::{fit_pca, PcaTarget, ShapeModelPca};
pub use resample::{upsample_series, upsample_track, UPSAMPLE_FACTOR};

use serde::{Deserialize, Serialize};

use crate::window::padded_indices;
use crate::{Error, Result, LANDMARKS};

/// Length of a flattened shape vector (x_1..x_36 then y_1..y_36).
pub const SHAPE_DIM: usize = 2 * LANDMARKS;

/// 36 lower-face landmarks in image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkShape {
    pub points: Vec<[f64; 2]>,
}

impl LandmarkShape {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() != LANDMARKS {
            return Err(Error::mismatch(
                format!("{LANDMARKS} landmarks"),
                format!("{} landmarks", points.len()),
            ));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite landmark coordinate"));
        }
        Ok(Self { points })
    }

    /// Flatten as x_1..x_36 followed by y_1..y_36.
    pub fn to_vector(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p[0])
            .chain(self.points.iter().map(|p| p[1]))
            .collect()
    }

    pub fn from_vector(v: &[f64]) -> Result<Self> {
        if v.len() != SHAPE_DIM {
            return Err(Error::mismatch(SHAPE_DIM, v.len()));
        }
        Self::new((0..LANDMARKS).map(|i| [v[i], v[LANDMARKS + i]]).collect())
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        [sx / n, sy / n]
    }

    /// Apply `p -> scale * R(angle) * p + shift`.
    pub fn similarity(&self, scale: f64, angle: f64, shift: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            points: self
                .points
                .iter()
                .map(|p| {
                    [
                        scale * (c * p[0] - s * p[1]) + shift[0],
                        scale * (s * p[0] + c * p[1]) + shift[1],
                    ]
                })
                .collect(),
        }
    }
}

/// Projection of one shape onto the PCA basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub coeffs: Vec<f64>,
}

/// Concatenated parameter vectors of `kv` consecutive frames centred at `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeWindow {
    pub vector: Vec<f64>,
    pub kv: usize,
    pub center: usize,
}

impl ShapeWindow {
    pub fn block(&self, offset: usize) -> &[f64] {
        let d = self.vector.len() / self.kv;
        &self.vector[offset * d..(offset + 1) * d]
    }
}

/// Slice F^v_j from a parameter sequence with edge replication.
pub fn shape_window(params: &[ShapeParams], j: usize, kv: usize) -> Result<ShapeWindow> {
    let idx = padded_indices(params.len(), j, kv)?;
    let d = params[0].coeffs.len();
    let mut vector = Vec::with_capacity(d * kv);
    for &src in &idx {
        if params[src].coeffs.len() != d {
            return Err(Error::mismatch(d, params[src].coeffs.len()));
        }
        vector.extend_from_slice(&params[src].coeffs);
    }
    Ok(ShapeWindow {
        vector,
        kv,
        center: j,
    })
}
