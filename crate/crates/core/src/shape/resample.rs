use super::LandmarkShape;
use crate::{Error, Result};

/// 25 Hz landmark tracks are brought to the 100 Hz acoustic frame rate.
pub const UPSAMPLE_FACTOR: usize = 4;

/// Interpolate each coordinate of a uniformly sampled series at `factor` times
/// the rate. Output length is `factor * (n - 1) + 1`, passing through every input.
///
/// Uses Catmull-Rom cubics for n >= 4 and falls back to linear for 2 or 3 samples.
/// End tangents are the one-sided differences, so straight lines are reproduced exactly.
pub fn upsample_series(series: &[Vec<f64>], factor: usize) -> Result<Vec<Vec<f64>>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "interpolation needs at least 2 samples, got {n}"
        )));
    }
    if factor == 0 {
        return Err(Error::invalid("upsampling factor must be positive"));
    }
    let dim = series[0].len();
    if series.iter().any(|s| s.len() != dim) {
        return Err(Error::invalid("ragged series"));
    }
    let cubic = n >= 4;
    let tangent = |i: usize, k: usize| -> f64 {
        if i == 0 {
            series[1][k] - series[0][k]
        } else if i == n - 1 {
            series[n - 1][k] - series[n - 2][k]
        } else {
            0.5 * (series[i + 1][k] - series[i - 1][k])
        }
    };

    let mut out = Vec::with_capacity(factor * (n - 1) + 1);
    for i in 0..n - 1 {
        for step in 0..factor {
            let t = step as f64 / factor as f64;
            let point = (0..dim)
                .map(|k| {
                    let (p0, p1) = (series[i][k], series[i + 1][k]);
                    if !cubic {
                        return p0 + (p1 - p0) * t;
                    }
                    let (t2, t3) = (t * t, t * t * t);
                    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                    let h10 = t3 - 2.0 * t2 + t;
                    let h01 = -2.0 * t3 + 3.0 * t2;
                    let h11 = t3 - t2;
                    h00 * p0 + h10 * tangent(i, k) + h01 * p1 + h11 * tangent(i + 1, k)
                })
                .collect();
            out.push(point);
        }
    }
    out.push(series[n - 1].clone());
    Ok(out)
}

/// Upsample a 25 Hz landmark track to 100 Hz.
pub fn upsample_track(track: &[LandmarkShape]) -> Result<Vec<LandmarkShape>> {
    let series: Vec<Vec<f64>> = track.iter().map(LandmarkShape::to_vector).collect();
    upsample_series(&series, UPSAMPLE_FACTOR)?
        .iter()
        .map(|v| LandmarkShape::from_vector(v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_is_4n_minus_3() {
        let s: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        assert_eq!(upsample_series(&s, 4).unwrap().len(), 37);
    }

    #[test]
    fn constant_stays_constant() {
        let s = vec![vec![3.5, -1.0]; 6];
        for p in upsample_series(&s, 4).unwrap() {
            assert_eq!(p, vec![3.5, -1.0]);
        }
    }

    #[test]
    fn lines_are_exact() {
        let s: Vec<Vec<f64>> = (0..7).map(|i| vec![2.0 * i as f64 - 1.0, 0.25 * i as f64]).collect();
        let out = upsample_series(&s, 4).unwrap();
        for (m, p) in out.iter().enumerate() {
            let t = m as f64 / 4.0;
            assert!((p[0] - (2.0 * t - 1.0)).abs() < 1e-9);
            assert!((p[1] - 0.25 * t).abs() < 1e-9);
        }
    }

    #[test]
    fn passes_through_samples() {
        let s: Vec<Vec<f64>> = (0..8).map(|i| vec![(i as f64).sin() * 3.0]).collect();
        let out = upsample_series(&s, 4).unwrap();
        for (i, v) in s.iter().enumerate() {
            assert_eq!(out[4 * i], *v);
        }
    }

    #[test]
    fn short_tracks() {
        let two = vec![vec![0.0], vec![4.0]];
        let out = upsample_series(&two, 4).unwrap();
        assert_eq!(out, vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        assert!(upsample_series(&[vec![1.0]], 4).is_err());
    }
}
