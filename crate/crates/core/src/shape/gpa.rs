use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::LandmarkShape;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpaConfig {
    /// Stop once the reference moves less than this between iterations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GpaConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

/// Converged GPA reference: zero centroid, unit Frobenius norm,
/// principal axis along +x with landmark 0 on the negative side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentModel {
    pub reference: Vec<[f64; 2]>,
    pub iterations: usize,
    pub converged: bool,
    pub final_displacement: f64,
}

fn normalize(shape: &LandmarkShape) -> Result<Vec<[f64; 2]>> {
    let c = shape.centroid();
    let centered: Vec<[f64; 2]> = shape
        .points
        .iter()
        .map(|p| [p[0] - c[0], p[1] - c[1]])
        .collect();
    let norm = centered
        .iter()
        .map(|p| p[0] * p[0] + p[1] * p[1])
        .sum::<f64>()
        .sqrt();
    if norm < 1e-12 {
        return Err(Error::Degenerate("all landmarks coincide".into()));
    }
    Ok(centered.iter().map(|p| [p[0] / norm, p[1] / norm]).collect())
}

fn rotate(points: &[[f64; 2]], angle: f64) -> Vec<[f64; 2]> {
    let (s, c) = angle.sin_cos();
    points
        .iter()
        .map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]])
        .collect()
}

/// Proper rotation (det +1) taking `src` onto `dst` in the least-squares sense.
///
/// Solved through the SVD of the 2x2 cross-covariance, with the smallest
/// singular direction flipped whenever the unconstrained optimum is a reflection.
fn optimal_rotation(src: &[[f64; 2]], dst: &[[f64; 2]]) -> Matrix2<f64> {
    let mut h = Matrix2::zeros();
    for (p, q) in src.iter().zip(dst) {
        h += Matrix2::new(p[0] * q[0], p[0] * q[1], p[1] * q[0], p[1] * q[1]);
    }
    let svd = h.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let v = v_t.transpose();
    let mut d = Matrix2::identity();
    if (v * u.transpose()).determinant() < 0.0 {
        d[(1, 1)] = -1.0;
    }
    v * d * u.transpose()
}

fn apply(r: &Matrix2<f64>, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    points
        .iter()
        .map(|p| {
            [
                r[(0, 0)] * p[0] + r[(0, 1)] * p[1],
                r[(1, 0)] * p[0] + r[(1, 1)] * p[1],
            ]
        })
        .collect()
}

/// Rotate a centred shape into the canonical frame used for the reference.
fn canonical_orientation(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut scatter = Matrix2::zeros();
    for p in points {
        scatter += Matrix2::new(p[0] * p[0], p[0] * p[1], p[1] * p[0], p[1] * p[1]);
    }
    let eig = SymmetricEigen::new(scatter);
    let (hi, lo) = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
        (0, 1)
    } else {
        (1, 0)
    };
    let (l1, l2) = (eig.eigenvalues[hi], eig.eigenvalues[lo]);
    let angle = if (l1 - l2) > 1e-6 * (l1 + l2) {
        let axis = eig.eigenvectors.column(hi);
        -axis[1].atan2(axis[0])
    } else {
        // Isotropic cloud: orient by the first landmark off the origin.
        let p = points
            .iter()
            .find(|p| p[0].hypot(p[1]) > 1e-9)
            .copied()
            .unwrap_or([1.0, 0.0]);
        std::f64::consts::PI - p[1].atan2(p[0])
    };
    let mut out = rotate(points, angle);
    // Resolve the 180 degree ambiguity: landmark 0 sits at negative x.
    let x0 = out[0][0];
    let flip = if x0.abs() > 1e-9 {
        x0 > 0.0
    } else {
        out.iter().map(|p| p[0].powi(3)).sum::<f64>() < 0.0
    };
    if flip {
        out = rotate(&out, std::f64::consts::PI);
    }
    out
}

fn sq_dist(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2))
        .sum()
}

/// Full Procrustes distance: both shapes normalized, then optimally rotated.
pub fn procrustes_distance(a: &LandmarkShape, b: &LandmarkShape) -> Result<f64> {
    let na = normalize(a)?;
    let nb = normalize(b)?;
    let r = optimal_rotation(&na, &nb);
    Ok(sq_dist(&apply(&r, &na), &nb).sqrt())
}

/// Iterative generalized Procrustes analysis.
pub fn gpa_align(
    shapes: &[LandmarkShape],
    cfg: &GpaConfig,
) -> Result<(AlignmentModel, Vec<LandmarkShape>)> {
    if shapes.is_empty() {
        return Err(Error::invalid("GPA needs at least one shape"));
    }
    let normalized: Vec<Vec<[f64; 2]>> = shapes.iter().map(normalize).collect::<Result<_>>()?;
    let mut reference = canonical_orientation(&normalized[0]);
    let mut aligned: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut iterations = 0;
    let mut displacement = f64::INFINITY;

    while iterations < cfg.max_iter.max(1) {
        iterations += 1;
        aligned = normalized
            .iter()
            .map(|s| apply(&optimal_rotation(s, &reference), s))
            .collect();
        let n = aligned.len() as f64;
        let mut mean = vec![[0.0; 2]; reference.len()];
        for s in &aligned {
            for (m, p) in mean.iter_mut().zip(s) {
                m[0] += p[0] / n;
                m[1] += p[1] / n;
            }
        }
        let mean_shape = LandmarkShape { points: mean };
        let next = canonical_orientation(&normalize(&mean_shape)?);
        displacement = sq_dist(&next, &reference).sqrt();
        reference = next;
        if displacement < cfg.tol {
            break;
        }
    }
    // Final pass so the returned shapes sit on the returned reference.
    let aligned = if displacement == 0.0 {
        aligned
    } else {
        normalized
            .iter()
            .map(|s| apply(&optimal_rotation(s, &reference), s))
            .collect()
    };
    let model = AlignmentModel {
        reference,
        iterations,
        converged: displacement < cfg.tol,
        final_displacement: displacement,
    };
    Ok((
        model,
        aligned
            .into_iter()
            .map(|points| LandmarkShape { points })
            .collect(),
    ))
}

impl AlignmentModel {
    /// Remove translation, scale and rotation of `shape` relative to the reference.
    pub fn align(&self, shape: &LandmarkShape) -> Result<LandmarkShape> {
        if shape.points.len() != self.reference.len() {
            return Err(Error::mismatch(self.reference.len(), shape.points.len()));
        }
        let n = normalize(shape)?;
        let r = optimal_rotation(&n, &self.reference);
        Ok(LandmarkShape {
            points: apply(&r, &n),
        })
    }

    pub fn reference_shape(&self) -> LandmarkShape {
        LandmarkShape {
            points: self.reference.clone(),
        }
    }
}
