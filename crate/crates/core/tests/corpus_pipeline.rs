use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use emoface::audio::{write_wav, AudioClip, FrontendConfig};
use emoface::corpus::{
    build_examples, load_manifest, load_raw, make_folds, speaker_groups, write_manifest, FoldOptions,
    FoldStrategy, UtteranceRecord,
};
use emoface::emotion::{decide, utterance_histogram, Emotion, UtteranceDecision, TOP_ONE_THRESHOLD};
use emoface::nn::Dataset;
use emoface::pipeline::{cmd_prepare, load_splits, shape_errors, train_dsrn, NetSection, RunConfig};
use emoface::regression::{fuse_estimate, WindowRegressor};
use emoface::shape::{shape_window, write_landmark_csv, LandmarkShape};
use emoface::synth::{articulate, generate, write_disk_corpus, DiskCorpusSpec, SyntheticSpec};
use emoface::{Error, Result};

fn fake_records(n: usize) -> Vec<UtteranceRecord> {
    (0..n)
        .map(|i| UtteranceRecord {
            id: format!("r{i:03}"),
            speaker: format!("s{}", i % 4),
            emotion: Emotion::ALL[i % 7],
            wav_path: PathBuf::new(),
            landmarks_path: PathBuf::new(),
        })
        .collect()
}

fn write_utterance(dir: &Path, id: &str, secs: f64) -> (PathBuf, PathBuf) {
    let wav = dir.join(format!("{id}.wav"));
    let csv = dir.join(format!("{id}.csv"));
    let n = (secs * 16_000.0) as usize;
    let samples = (0..n).map(|i| 0.3 * (i as f64 * 0.05).sin()).collect();
    write_wav(&wav, &AudioClip::new(samples, 16_000).unwrap()).unwrap();
    let frames = (secs * 25.0) as usize + 1;
    let track: Vec<_> = (0..frames)
        .map(|f| LandmarkShape::new(articulate(0.1 * (f as f64 * 0.7).sin().abs(), 0.0)).unwrap())
        .collect();
    write_landmark_csv(&csv, &track).unwrap();
    (wav, csv)
}

#[test]
fn manifest_one_per_emotion_and_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let records: Vec<UtteranceRecord> = Emotion::ALL
        .iter()
        .map(|&e| {
            let id = format!("u_{}", e.name());
            let (wav_path, landmarks_path) = write_utterance(dir.path(), &id, 0.3);
            UtteranceRecord { id, speaker: "s0".into(), emotion: e, wav_path, landmarks_path }
        })
        .collect();
    let manifest = dir.path().join("manifest.csv");
    write_manifest(&manifest, &records).unwrap();
    assert_eq!(load_manifest(&manifest).unwrap(), records);

    let text = std::fs::read_to_string(&manifest).unwrap().replace(",fear,", ",boredom,");
    std::fs::write(&manifest, text).unwrap();
    match load_manifest(&manifest) {
        Err(Error::UnknownEmotion { label, context }) => {
            assert_eq!(label, "boredom");
            assert!(context.contains("u_fear"), "{context}");
        }
        other => panic!("expected unknown emotion, got {other:?}"),
    }

    write_manifest(&manifest, &records).unwrap();
    std::fs::remove_file(&records[2].landmarks_path).unwrap();
    let err = load_manifest(&manifest).unwrap_err().to_string();
    assert!(err.contains(&records[2].id), "{err}");
}

#[test]
fn savee_layout_speaker_groups() {
    let groups = speaker_groups(&fake_records(28));
    assert_eq!(groups.len(), 4);
    assert!(groups.values().all(|ids| ids.len() == 7));
}

#[test]
fn fold_sizes_and_stratification() {
    let records = fake_records(100);
    let plan = make_folds(&records, 3, &FoldOptions::default()).unwrap();
    assert_eq!(plan.test.len(), 10);
    assert_eq!(plan.folds.len(), 5);
    for fold in &plan.folds {
        assert_eq!((fold.train.len(), fold.validation.len()), (72, 18));
        let all: BTreeSet<&String> = fold.train.iter().chain(&fold.validation).chain(&plan.test).collect();
        assert_eq!(all.len(), 100, "disjoint and covering");
    }
    // Recount: each emotion's test share is within one item of 10%.
    for e in Emotion::ALL {
        let total = records.iter().filter(|r| r.emotion == e).count();
        let in_test = plan
            .test
            .iter()
            .filter(|id| records.iter().any(|r| &r.id == *id && r.emotion == e))
            .count();
        assert!((in_test as f64 - 0.1 * total as f64).abs() <= 1.0, "{e}: {in_test}/{total}");
    }
    assert_eq!(plan, make_folds(&records, 3, &FoldOptions::default()).unwrap());
    assert_ne!(plan, make_folds(&records, 4, &FoldOptions::default()).unwrap());
}

#[test]
fn fold_errors_and_speaker_holdout() {
    assert!(make_folds(&fake_records(9), 0, &FoldOptions::default()).is_err());
    let mut sparse = fake_records(12);
    sparse[6].emotion = Emotion::Anger; // leaves surprise with one record
    assert!(make_folds(&sparse, 0, &FoldOptions::default()).is_err());

    let records = fake_records(56);
    let opts = FoldOptions { strategy: FoldStrategy::SpeakerHoldout, ..FoldOptions::default() };
    let plan = make_folds(&records, 1, &opts).unwrap();
    let speaker = |id: &String| records.iter().find(|r| &r.id == id).unwrap().speaker.clone();
    let test_speakers: BTreeSet<String> = plan.test.iter().map(speaker).collect();
    assert_eq!(test_speakers.len(), 1);
    for fold in &plan.folds {
        assert!(fold.train.iter().chain(&fold.validation).all(|id| !test_speakers.contains(&speaker(id))));
    }
}

#[test]
fn one_second_pairing_and_example_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let (wav_path, landmarks_path) = write_utterance(dir.path(), "one", 1.0);
    let rec = UtteranceRecord { id: "one".into(), speaker: "s".into(), emotion: Emotion::Neutral, wav_path, landmarks_path };
    let raw = load_raw(&rec, &FrontendConfig::default()).unwrap().unwrap();
    // 98 acoustic frames vs 4·25+1 = 101 upsampled frames: truncated to 98, gap 3.
    assert_eq!(raw.mfsc.len(), 98);
    assert_eq!(raw.landmarks_100.len(), 98);
    assert_eq!(raw.pairing_gap, 3);
    assert!(!raw.flagged());

    let (short_wav, short_csv) = write_utterance(dir.path(), "short", 0.1);
    let short = UtteranceRecord { id: "short".into(), speaker: "s".into(), emotion: Emotion::Neutral, wav_path: short_wav, landmarks_path: short_csv };
    assert!(load_raw(&short, &FrontendConfig::default()).unwrap().is_none());
}

#[test]
fn examples_partition_by_emotion_and_align() {
    let corpus = generate(&SyntheticSpec { n_utterances: 21, frames_per_utterance: 25, ..SyntheticSpec::default() }).unwrap();
    let (dern, dsrn) = build_examples(&corpus.utterances, 15, 5);
    assert_eq!(dern.len(), 21 * 25);
    assert_eq!(dsrn.len(), 7);
    for (e, data) in &dsrn {
        assert_eq!(data.len(), 3 * 25);
        for i in 0..data.len() {
            let u = data.utterance_of(i);
            assert_eq!(u.emotion, *e);
            let (_, j) = data.index[i];
            let image = u.mfsc.window(j, 15).unwrap();
            let window = shape_window(&u.params, j, 5).unwrap();
            assert_eq!((image.center, window.center), (j, j));
            assert_eq!(data.shape_target(i).unwrap(), window.vector);
        }
    }
}

#[test]
fn synthetic_targets_reproduce_maps_without_noise() {
    let spec = SyntheticSpec { n_utterances: 14, frames_per_utterance: 40, noise: 0.0, ..SyntheticSpec::default() };
    let corpus = generate(&spec).unwrap();
    for u in &corpus.utterances {
        for j in 2..u.len() - 2 {
            let image = u.mfsc.window(j, 15).unwrap();
            let g = corpus.truth.window_map(u.emotion, &image).unwrap();
            let target = shape_window(&u.params, j, 5).unwrap().vector;
            assert_eq!(g, target, "{} frame {j}", u.id);
        }
    }
    for a in Emotion::ALL {
        for b in Emotion::ALL {
            if a < b {
                assert!(corpus.truth.mean_separation(a, b, 100, 77) > spec.margin);
            }
        }
    }
}

/// Brute-force recomputation of the three error conventions.
fn brute_mse<R: WindowRegressor>(reg: &R, utts: &[emoface::corpus::FeatureUtterance], decs: &[UtteranceDecision]) -> (f64, f64) {
    let (mut sq, mut count, mut windows) = (0.0, 0usize, 0usize);
    for (u, d) in utts.iter().zip(decs) {
        for j in 0..u.len() {
            let est = fuse_estimate(reg, &u.mfsc.window(j, 15).unwrap(), d).unwrap();
            let target = shape_window(&u.params, j, 5).unwrap();
            for (a, b) in est.vector.iter().zip(&target.vector) {
                sq += (a - b) * (a - b);
                count += 1;
            }
            windows += 1;
        }
    }
    (sq / count as f64, sq / windows as f64)
}

#[test]
fn shape_errors_match_brute_force_and_perfect_classifier_matches_oracle() -> Result<()> {
    let corpus = generate(&SyntheticSpec { n_utterances: 14, frames_per_utterance: 30, ..SyntheticSpec::default() })?;
    let mut section = NetSection::<emoface::nn::DsrnConfig>::default();
    section.arch.conv_depths = [2, 2, 2, 2];
    section.arch.fc_units = [8, 8];
    section.train.epochs = 1;
    let mut models = std::collections::BTreeMap::new();
    for e in Emotion::ALL {
        models.insert(e, train_dsrn(&corpus.utterances, &[], Some(e), 15, 5, &section, 0)?.0);
    }
    let bank = emoface::regression::DsrnBank::new(models, 5, 18)?;
    let utts = &corpus.utterances;
    let oracle: Vec<_> = utts.iter().map(|u| UtteranceDecision::certain(u.emotion)).collect();
    // A perfect frame classifier labels every frame with the true emotion.
    let perfect: Vec<_> = utts
        .iter()
        .map(|u| decide(&utterance_histogram(&vec![u.emotion; u.len()]).unwrap(), TOP_ONE_THRESHOLD).unwrap())
        .collect();
    let a = shape_errors(&bank, utts, &oracle, 15)?;
    let b = shape_errors(&bank, utts, &perfect, 15)?;
    assert_eq!(a, b);
    let (per_coef, per_window) = brute_mse(&bank, utts, &oracle);
    assert!((a.per_coefficient - per_coef).abs() < 1e-12);
    assert!((a.per_window - per_window).abs() < 1e-10);
    assert_eq!(a.windows, 14 * 30);
    Ok(())
}

#[test]
fn training_loss_decreases_early() -> Result<()> {
    let corpus = generate(&SyntheticSpec { n_utterances: 28, frames_per_utterance: 60, ..SyntheticSpec::default() })?;
    let mut section = NetSection::<emoface::nn::DsrnConfig>::default();
    section.arch.conv_depths = [4, 8, 8, 8];
    section.arch.fc_units = [64, 32];
    section.arch.dropout = 0.1;
    section.train.epochs = 5;
    section.train.batch_size = 32;
    let (_, log) = train_dsrn(&corpus.utterances, &[], Some(Emotion::Happiness), 15, 5, &section, 1)?;
    let losses: Vec<f64> = log.iter().map(|e| e.train_loss).collect();
    assert!(losses[4] < losses[0], "{losses:?}");
    // Monotone trend: a least-squares slope below zero.
    let slope = losses.iter().enumerate().map(|(i, l)| (i as f64 - 2.0) * l).sum::<f64>();
    assert!(slope < 0.0, "{losses:?}");
    Ok(())
}

#[test]
fn prepare_keeps_test_utterances_out_of_statistics() -> Result<()> {
    let dir = tempfile::tempdir().unwrap();
    write_disk_corpus(dir.path(), &DiskCorpusSpec { speakers: 2, per_emotion_per_speaker: 1, ..DiskCorpusSpec::default() })?;
    let mut cfg = RunConfig { seed: 5, ..RunConfig::default() };
    cfg.paths.manifest = dir.path().join("manifest.csv");
    cfg.paths.work_dir = dir.path().join("work");
    let report = cmd_prepare(&cfg)?;
    assert_eq!(report.d, 18);
    assert!(report.variance_covered > 0.0 && report.variance_covered <= 1.0 + 1e-12);
    let splits = load_splits(&cfg)?;
    assert_eq!(
        (splits.train.len(), splits.validation.len(), splits.test.len()),
        (report.fold_sizes.train, report.fold_sizes.validation, report.fold_sizes.test)
    );
    assert_eq!(report.fold_sizes.train + report.fold_sizes.validation + report.fold_sizes.test, 14);
    let read = |name: &str| std::fs::read(cfg.paths.work_dir.join(name)).unwrap();
    let before = (read("normalizer.json"), read("shape_model.json"), read("alignment.json"));

    // Replace every held-out utterance with a loud square wave and a wide-open mouth.
    let records = load_manifest(&cfg.paths.manifest)?;
    for id in &splits.test.iter().map(|u| u.id.clone()).collect::<Vec<_>>() {
        let r = records.iter().find(|r| &r.id == id).unwrap();
        let n = 20_000;
        let loud = (0..n).map(|i| if (i / 40) % 2 == 0 { 0.9 } else { -0.9 }).collect();
        write_wav(&r.wav_path, &AudioClip::new(loud, 16_000)?)?;
        let track: Vec<_> = (0..32).map(|_| LandmarkShape::new(articulate(0.9, 0.4)).unwrap()).collect();
        write_landmark_csv(&r.landmarks_path, &track)?;
    }
    cmd_prepare(&cfg)?;
    assert_eq!(before, (read("normalizer.json"), read("shape_model.json"), read("alignment.json")));
    Ok(())
}
