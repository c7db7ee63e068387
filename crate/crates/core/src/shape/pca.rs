use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{LandmarkShape, ShapeParams, SHAPE_DIM};
use crate::{Error, Result};

/// How many principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaTarget {
    Components(usize),
    /// Smallest D whose cumulative variance fraction reaches the target.
    Variance(f64),
}

impl Default for PcaTarget {
    fn default() -> Self {
        PcaTarget::Components(18)
    }
}

/// Mean shape plus an orthonormal eigenbasis of the aligned-shape covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeModelPca {
    pub mean: Vec<f64>,
    /// SHAPE_DIM x d, row-major.
    pub basis: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub d: usize,
    pub variance_covered: f64,
}

pub fn fit_pca(shapes: &[LandmarkShape], target: PcaTarget) -> Result<ShapeModelPca> {
    let vectors: Vec<Vec<f64>> = shapes.iter().map(LandmarkShape::to_vector).collect();
    fit_pca_vectors(&vectors, target)
}

pub(crate) fn fit_pca_vectors(vectors: &[Vec<f64>], target: PcaTarget) -> Result<ShapeModelPca> {
    let n = vectors.len();
    let needed = match target {
        PcaTarget::Components(d) => {
            if d == 0 || d > SHAPE_DIM {
                return Err(Error::invalid(format!(
                    "component count must be in 1..={SHAPE_DIM}, got {d}"
                )));
            }
            d + 1
        }
        PcaTarget::Variance(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid(format!("variance target {f} outside (0, 1]")));
            }
            2
        }
    };
    if n < needed {
        return Err(Error::invalid(format!(
            "PCA needs at least {needed} shapes, got {n}"
        )));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != SHAPE_DIM) {
        return Err(Error::mismatch(SHAPE_DIM, v.len()));
    }

    let mut mean = vec![0.0; SHAPE_DIM];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, SHAPE_DIM, |r, c| vectors[r][c] - mean[c]);
    let cov = (centered.transpose() * &centered) / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..SHAPE_DIM).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let all: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = all.iter().sum();
    let cumulative = |d: usize| -> f64 {
        if total <= 0.0 {
            1.0
        } else {
            all[..d].iter().sum::<f64>() / total
        }
    };
    let d = match target {
        PcaTarget::Components(d) => d,
        PcaTarget::Variance(f) => (1..=SHAPE_DIM)
            .find(|&d| cumulative(d) >= f - 1e-12)
            .unwrap_or(SHAPE_DIM),
    };

    let mut basis = vec![0.0; SHAPE_DIM * d];
    for (k, &src) in order[..d].iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        // Sign convention: largest-magnitude entry positive.
        let pivot = col.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..SHAPE_DIM {
            basis[r * d + k] = sign * col[r];
        }
    }
    Ok(ShapeModelPca {
        mean,
        basis,
        eigenvalues: all[..d].to_vec(),
        d,
        variance_covered: cumulative(d),
    })
}

impl ShapeModelPca {
    pub fn basis_at(&self, row: usize, k: usize) -> f64 {
        self.basis[row * self.d + k]
    }

    /// basisᵀ (s - mean)
    pub fn project_vector(&self, s: &[f64]) -> Result<ShapeParams> {
        if s.len() != SHAPE_DIM {
            return Err(Error::mismatch(SHAPE_DIM, s.len()));
        }
        let mut coeffs = vec![0.0; self.d];
        for (r, (x, m)) in s.iter().zip(&self.mean).enumerate() {
            let diff = x - m;
            let row = &self.basis[r * self.d..(r + 1) * self.d];
            for (c, b) in coeffs.iter_mut().zip(row) {
                *c += b * diff;
            }
        }
        Ok(ShapeParams { coeffs })
    }

    pub fn project(&self, shape: &LandmarkShape) -> Result<ShapeParams> {
        self.project_vector(&shape.to_vector())
    }

    /// mean + basis p
    pub fn reconstruct_vector(&self, params: &ShapeParams) -> Result<Vec<f64>> {
        if params.coeffs.len() != self.d {
            return Err(Error::mismatch(self.d, params.coeffs.len()));
        }
        Ok((0..SHAPE_DIM)
            .map(|r| {
                let row = &self.basis[r * self.d..(r + 1) * self.d];
                self.mean[r] + row.iter().zip(&params.coeffs).map(|(b, p)| b * p).sum::<f64>()
            })
            .collect())
    }

    pub fn reconstruct(&self, params: &ShapeParams) -> Result<LandmarkShape> {
        LandmarkShape::from_vector(&self.reconstruct_vector(params)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vectors(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..SHAPE_DIM).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn default_keeps_18() {
        let m = fit_pca_vectors(&random_vectors(40, 1), PcaTarget::default()).unwrap();
        assert_eq!(m.d, 18);
        assert_eq!(m.basis.len(), SHAPE_DIM * 18);
    }

    #[test]
    fn full_basis_covers_everything_and_reconstructs() {
        let v = random_vectors(100, 2);
        let m = fit_pca_vectors(&v, PcaTarget::Components(SHAPE_DIM)).unwrap();
        assert!((m.variance_covered - 1.0).abs() < 1e-9);
        let p = m.project_vector(&v[3]).unwrap();
        let back = m.reconstruct_vector(&p).unwrap();
        for (a, b) in back.iter().zip(&v[3]) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn mean_projects_to_zero() {
        let m = fit_pca_vectors(&random_vectors(30, 3), PcaTarget::Components(5)).unwrap();
        let p = m.project_vector(&m.mean).unwrap();
        assert!(p.coeffs.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn variance_target_picks_smallest_d() {
        let v = random_vectors(100, 4);
        let m = fit_pca_vectors(&v, PcaTarget::Variance(0.9)).unwrap();
        assert!(m.variance_covered >= 0.9 - 1e-12);
        let smaller = fit_pca_vectors(&v, PcaTarget::Components(m.d - 1)).unwrap();
        assert!(smaller.variance_covered < 0.9);
    }

    #[test]
    fn errors() {
        assert!(fit_pca_vectors(&random_vectors(18, 5), PcaTarget::Components(18)).is_err());
        assert!(fit_pca_vectors(&random_vectors(30, 5), PcaTarget::Components(0)).is_err());
        let m = fit_pca_vectors(&random_vectors(30, 5), PcaTarget::Components(4)).unwrap();
        assert!(m.project_vector(&[0.0; 10]).is_err());
        assert!(m.reconstruct_vector(&ShapeParams { coeffs: vec![0.0; 5] }).is_err());
    }
}
