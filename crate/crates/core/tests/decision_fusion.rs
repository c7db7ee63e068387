use std::collections::BTreeMap;

use emoface::audio::{SpectralImage, SpectralSequence};
use emoface::emotion::{decide, utterance_histogram, Emotion, UtteranceDecision, TOP_ONE_THRESHOLD};
use emoface::nn::{dsrn_layers, DsrnConfig, Network, Shape3};
use emoface::regression::{
    animate, contributor_count, fuse_estimate, image_tensor, overlap_average, DsrnBank, WindowEstimate,
    WindowRegressor,
};
use emoface::shape::{fit_pca, LandmarkShape, PcaTarget, ShapeParams};
use emoface::synth::articulate;
use emoface::Result;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hist(pairs: &[(usize, f64)]) -> [f64; 7] {
    let mut p = [0.0; 7];
    for &(i, v) in pairs {
        p[i] = v;
    }
    p
}

#[test]
fn threshold_examples() {
    let d = decide(&hist(&[(2, 0.7), (5, 0.2), (0, 0.1)]), TOP_ONE_THRESHOLD).unwrap();
    assert_eq!((d.e_star, d.e_star2), (Emotion::ALL[2], Emotion::ALL[5]));
    assert_eq!((d.p_star, d.p_star2), (1.0, 0.0));

    let d = decide(&hist(&[(1, 0.5), (3, 0.3), (6, 0.2)]), TOP_ONE_THRESHOLD).unwrap();
    assert!((d.p_star - 0.625).abs() < 1e-15 && (d.p_star2 - 0.375).abs() < 1e-15);

    // Exactly at the threshold keeps the runner-up.
    let d = decide(&hist(&[(0, 0.65), (1, 0.35)]), TOP_ONE_THRESHOLD).unwrap();
    assert!(d.p_star2 > 0.0);

    let d = decide(&[1.0 / 7.0; 7], TOP_ONE_THRESHOLD).unwrap();
    assert_eq!((d.e_star.index(), d.e_star2.index()), (0, 1));
    assert_eq!((d.p_star, d.p_star2), (0.5, 0.5));
}

#[test]
fn histogram_examples() {
    let e = Emotion::ALL;
    assert_eq!(utterance_histogram(&[e[3]; 9]).unwrap(), hist(&[(3, 1.0)]));
    let mut labels = vec![e[0]; 6];
    labels.extend([e[2]; 4]);
    assert_eq!(utterance_histogram(&labels).unwrap(), hist(&[(0, 0.6), (2, 0.4)]));
    assert!("boredom".parse::<Emotion>().is_err());
}

proptest! {
    #[test]
    fn histogram_recount(labels in prop::collection::vec(0usize..7, 1..200)) {
        let emotions: Vec<Emotion> = labels.iter().map(|&i| Emotion::ALL[i]).collect();
        let p = utterance_histogram(&emotions).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..7 {
            let count = labels.iter().filter(|&&i| i == k).count();
            prop_assert_eq!(p[k], count as f64 / labels.len() as f64);
        }
    }

    #[test]
    fn decision_weights_and_permutation(raw in prop::array::uniform7(0u32..20), perm_seed in 0u64..100) {
        prop_assume!(raw.iter().any(|&v| v > 0));
        let total: u32 = raw.iter().sum();
        let p: [f64; 7] = std::array::from_fn(|i| raw[i] as f64 / total as f64);
        let d = decide(&p, TOP_ONE_THRESHOLD).unwrap();
        prop_assert!((d.p_star + d.p_star2 - 1.0).abs() < 1e-12);
        let top = p[d.e_star.index()];
        let second = p[d.e_star2.index()];
        prop_assert_eq!(d.p_star2 == 0.0, top > TOP_ONE_THRESHOLD || second == 0.0);

        // Relabel emotions; the decision follows (up to ties, which break by index).
        let mut order: Vec<usize> = (0..7).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..7).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let q: [f64; 7] = std::array::from_fn(|i| p[order[i]]);
        let dq = decide(&q, TOP_ONE_THRESHOLD).unwrap();
        prop_assert_eq!(p[order[dq.e_star.index()]], top);
        prop_assert_eq!(p[order[dq.e_star2.index()]], second);
        prop_assert_eq!(dq.p_star, d.p_star);
    }
}

/// Returns `values[emotion]` for every coefficient.
struct Constant {
    values: BTreeMap<Emotion, f64>,
    kv: usize,
    d: usize,
}

impl WindowRegressor for Constant {
    fn kv(&self) -> usize {
        self.kv
    }
    fn params_per_frame(&self) -> usize {
        self.d
    }
    fn predict_window(&self, e: Emotion, _: &SpectralImage) -> Result<Vec<f64>> {
        Ok(vec![self.values[&e]; self.kv * self.d])
    }
}

fn image(center: usize) -> SpectralImage {
    SpectralImage { data: vec![0.0; 40 * 15], ka: 15, center }
}

#[test]
fn constant_model_fusion_oracle() {
    let (a, b) = (0.731, -2.25);
    let reg = Constant {
        values: BTreeMap::from([(Emotion::Anger, a), (Emotion::Sadness, b)]),
        kv: 5,
        d: 18,
    };
    let dec = UtteranceDecision {
        e_star: Emotion::Anger,
        e_star2: Emotion::Sadness,
        p_star: 0.6,
        p_star2: 0.4,
        histogram: hist(&[(0, 0.6), (5, 0.4)]),
    };
    let est = fuse_estimate(&reg, &image(3), &dec).unwrap();
    assert_eq!(est.center, 3);
    for v in &est.vector {
        assert!((v - (0.6 * a + 0.4 * b)).abs() < 1e-12);
    }
    // Swapping the roles of the two emotions changes nothing.
    let swapped = UtteranceDecision {
        e_star: Emotion::Sadness,
        e_star2: Emotion::Anger,
        p_star: 0.4,
        p_star2: 0.6,
        ..dec.clone()
    };
    let est2 = fuse_estimate(&reg, &image(3), &swapped).unwrap();
    for (x, y) in est.vector.iter().zip(&est2.vector) {
        assert!((x - y).abs() < 1e-12);
    }
    // p* = 1 never consults the runner-up, which has no model here.
    let certain = UtteranceDecision::certain(Emotion::Anger);
    assert!(fuse_estimate(&reg, &image(0), &certain).unwrap().vector.iter().all(|&v| v == a));
}

fn brute_force_average(estimates: &[WindowEstimate], kv: usize, d: usize) -> Vec<Vec<f64>> {
    brute_force(estimates, kv, d).0
}

fn brute_force(estimates: &[WindowEstimate], kv: usize, d: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let n = estimates.len();
    let delta = (kv / 2) as isize;
    let mut sums = vec![vec![0.0; d]; n];
    let mut counts = vec![0usize; n];
    for (i, est) in estimates.iter().enumerate() {
        for v in 0..kv {
            let t = i as isize + v as isize - delta;
            if t < 0 || t >= n as isize {
                continue;
            }
            let t = t as usize;
            counts[t] += 1;
            for k in 0..d {
                sums[t][k] += est.vector[v * d + k];
            }
        }
    }
    let avg = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| s.into_iter().map(|v| v / c as f64).collect())
        .collect();
    (avg, counts)
}

#[test]
fn overlap_average_exhaustive_oracle() {
    let d = 18;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for kv in [1, 3, 5] {
        for n in [5, 12, 40] {
            let estimates: Vec<WindowEstimate> = (0..n)
                .map(|i| WindowEstimate {
                    vector: (0..kv * d).map(|_| rng.random_range(-3.0..3.0)).collect(),
                    center: i,
                })
                .collect();
            let track = overlap_average(&estimates, kv).unwrap();
            let (oracle, counts) = brute_force(&estimates, kv, d);
            assert_eq!(track.len(), n);
            for j in 0..n {
                for k in 0..d {
                    assert!((track.frames[j].coeffs[k] - oracle[j][k]).abs() < 1e-12, "kv={kv} n={n} j={j}");
                }
                assert_eq!(contributor_count(n, j, kv), counts[j]);
                if j >= kv / 2 && j + kv / 2 < n {
                    assert_eq!(counts[j], kv);
                }
            }
        }
    }
}

#[test]
fn overlap_average_constant_field_and_kv1() {
    let v: Vec<f64> = (0..18).map(|k| k as f64 * 0.5).collect();
    let estimates: Vec<_> = (0..9)
        .map(|i| WindowEstimate { vector: v.repeat(5), center: i })
        .collect();
    for f in overlap_average(&estimates, 5).unwrap().frames {
        assert_eq!(f.coeffs, v);
    }
    let single: Vec<_> = (0..4).map(|i| WindowEstimate { vector: vec![i as f64; 18], center: i }).collect();
    let track = overlap_average(&single, 1).unwrap();
    for (i, f) in track.frames.iter().enumerate() {
        assert_eq!(f.coeffs, vec![i as f64; 18]);
    }
}

fn tiny_bank(kv: usize, d: usize, zero: bool) -> DsrnBank {
    let specs = dsrn_layers(&DsrnConfig { conv_depths: [2, 2, 2, 2], fc_units: [6, 6], dropout: 0.5 }, kv * d).unwrap();
    let models = Emotion::ALL
        .iter()
        .map(|&e| {
            let net = if zero {
                Network::uninitialized(Shape3::new(40, 15, 1), &specs, 0).unwrap()
            } else {
                Network::new(Shape3::new(40, 15, 1), &specs, 100 + e.index() as u64).unwrap()
            };
            (e, net)
        })
        .collect();
    DsrnBank::new(models, kv, d).unwrap()
}

fn pca_model() -> emoface::shape::ShapeModelPca {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let shapes: Vec<_> = (0..60)
        .map(|_| {
            let mut s = LandmarkShape::new(articulate(rng.random_range(0.0..0.3), rng.random_range(-0.1..0.1))).unwrap();
            s.points.iter_mut().for_each(|p| p[1] += rng.random_range(-0.01..0.01));
            s
        })
        .collect();
    fit_pca(&shapes, PcaTarget::default()).unwrap()
}

fn random_sequence(n: usize, seed: u64) -> SpectralSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralSequence::new((0..n).map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0))).collect()).unwrap()
}

#[test]
fn zero_networks_reconstruct_the_mean_shape() {
    let pca = pca_model();
    let anim = animate(&tiny_bank(5, 18, true), &random_sequence(20, 0), 15, &UtteranceDecision::certain(Emotion::Fear), &pca).unwrap();
    assert_eq!(anim.landmarks.len(), 20);
    for s in &anim.landmarks {
        for (a, b) in s.to_vector().iter().zip(&pca.mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn animate_matches_step_by_step_composition() {
    let pca = pca_model();
    let bank = tiny_bank(5, 18, false);
    let seq = random_sequence(33, 4);
    let dec = decide(&hist(&[(1, 0.55), (4, 0.45)]), TOP_ONE_THRESHOLD).unwrap();
    let anim = animate(&bank, &seq, 15, &dec, &pca).unwrap();
    assert_eq!(anim.track.len(), seq.len());

    // Independent composition: run both networks directly, mix, average, reconstruct.
    let (m1, m2) = (bank.model(dec.e_star).unwrap(), bank.model(dec.e_star2).unwrap());
    let estimates: Vec<WindowEstimate> = (0..seq.len())
        .map(|j| {
            let x = image_tensor(&seq.window(j, 15).unwrap());
            let a = m1.predict(&x).unwrap().data;
            let b = m2.predict(&x).unwrap().data;
            WindowEstimate {
                vector: a.iter().zip(&b).map(|(u, v)| dec.p_star * u + dec.p_star2 * v).collect(),
                center: j,
            }
        })
        .collect();
    let oracle = brute_force_average(&estimates, 5, 18);
    for (j, s) in anim.landmarks.iter().enumerate() {
        let expect = pca.reconstruct(&ShapeParams { coeffs: oracle[j].clone() }).unwrap();
        for (p, q) in s.points.iter().zip(&expect.points) {
            assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
        }
    }

    // Averaging reconstructed landmarks equals reconstructing averaged parameters.
    let j = 16;
    let mut lm = vec![0.0; 72];
    for i in j - 2..=j + 2 {
        let block = ShapeParams { coeffs: estimates[i].vector[(j + 2 - i) * 18..(j + 3 - i) * 18].to_vec() };
        for (acc, v) in lm.iter_mut().zip(pca.reconstruct_vector(&block).unwrap()) {
            *acc += v / 5.0;
        }
    }
    for (a, b) in lm.iter().zip(anim.landmarks[j].to_vector()) {
        assert!((a - b).abs() < 1e-12);
    }

    // Deterministic.
    let again = animate(&bank, &seq, 15, &dec, &pca).unwrap();
    assert_eq!(again.track, anim.track);
}
