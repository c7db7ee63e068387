//! End-to-end commands: prepare features, train the networks, evaluate, animate.
//!
//! Everything is driven by a [`RunConfig`] and reads/writes a work directory:
//!
//! ```text
//! work_dir/
//!   normalizer.json alignment.json shape_model.json folds.json features.json prepare.json
//!   models/dern.emofnet models/dsrn_<emotion>.emofnet models/dsrn_combined.emofnet
//!   logs/<model>.json evaluation.json
//! ```
//!
//! Reported shape errors are in the PCA parameter space of the fitted shape
//! model, under three conventions (see [`ShapeErrors`]).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::audio::{extract_mfsc, fit_zscore, read_wav, FrontendConfig, Normalizer, SpectralSequence};
use crate::corpus::{
    load_manifest, load_raw, make_folds, to_features, ExampleKind, FeatureUtterance, FoldOptions,
    FoldPlan, WindowDataset,
};
use crate::emotion::{decide, utterance_histogram, Emotion, UtteranceDecision, TOP_ONE_THRESHOLD};
use crate::nn::{
    dern_layers, dsrn_layers, load_model, save_model, train, DernConfig, DsrnConfig, EpochLog, Loss,
    Dataset, Network, Shape3, TrainConfig,
};
use crate::regression::{
    animate, fuse_estimate, overlap_average, predict_frame_emotions, CombinedRegressor, DsrnBank,
    WindowRegressor,
};
use crate::render::{write_svg_frames, write_track_csv, write_track_json};
use crate::shape::{
    fit_pca, gpa_align, shape_window, write_landmark_csv, AlignmentModel, GpaConfig, PcaTarget,
    ShapeModelPca,
};
use crate::window::half_width;
use crate::{Error, Result, FRAME_RATE, MEL_BANDS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: PathBuf,
    pub work_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            manifest: PathBuf::from("manifest.csv"),
            work_dir: PathBuf::from("work"),
        }
    }
}

/// Architecture plus optimisation settings for one network family.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetSection<A> {
    pub arch: A,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub fold: usize,
    pub ka: usize,
    pub kv: usize,
    pub pca: PcaTarget,
    pub paths: Paths,
    pub frontend: FrontendConfig,
    pub folds: FoldOptions,
    pub dern: NetSection<DernConfig>,
    pub dsrn: NetSection<DsrnConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            fold: 0,
            ka: 15,
            kv: 5,
            pca: PcaTarget::default(),
            paths: Paths::default(),
            frontend: FrontendConfig::default(),
            folds: FoldOptions::default(),
            dern: NetSection::default(),
            dsrn: NetSection::default(),
        }
    }
}

impl RunConfig {
    /// Read TOML (or JSON when the extension is `.json`); relative paths are
    /// resolved against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.paths.manifest, &mut cfg.paths.work_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        half_width(self.ka).map_err(|_| Error::Config(format!("ka must be odd, got {}", self.ka)))?;
        half_width(self.kv).map_err(|_| Error::Config(format!("kv must be odd, got {}", self.kv)))?;
        if self.fold >= self.folds.n_folds {
            return Err(Error::Config(format!(
                "fold {} out of range for {} folds",
                self.fold, self.folds.n_folds
            )));
        }
        self.frontend.validate()
    }

    fn work(&self, rel: &str) -> PathBuf {
        self.paths.work_dir.join(rel)
    }
}

/// Per-model seed derived from the run seed, so each network gets an
/// independent but reproducible stream.
pub fn derive_seed(run_seed: u64, tag: u64) -> u64 {
    run_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

const DERN_TAG: u64 = 1;
const COMBINED_TAG: u64 = 2;

fn emotion_tag(e: Emotion) -> u64 {
    10 + e.index() as u64
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareReport {
    pub utterances: usize,
    pub skipped: Vec<String>,
    pub flagged: Vec<String>,
    pub frames: usize,
    pub fold: usize,
    pub fold_sizes: SplitSizes,
    pub d: usize,
    pub variance_covered: f64,
    pub gpa_iterations: usize,
    pub gpa_converged: bool,
}

/// Utterance features partitioned by the fold plan.
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Vec<FeatureUtterance>,
    pub validation: Vec<FeatureUtterance>,
    pub test: Vec<FeatureUtterance>,
}

/// Extract features, fit normalizer/GPA/PCA on the training fold only, and
/// write all artifacts to the work directory.
pub fn cmd_prepare(cfg: &RunConfig) -> Result<PrepareReport> {
    cfg.validate()?;
    let records = load_manifest(&cfg.paths.manifest)?;
    let plan = make_folds(&records, cfg.seed, &cfg.folds)?;
    let fold = plan.fold(cfg.fold)?;

    let mut raws = Vec::new();
    let mut skipped = Vec::new();
    for r in &records {
        match load_raw(r, &cfg.frontend)? {
            Some(raw) => raws.push(raw),
            None => skipped.push(r.id.clone()),
        }
    }
    let flagged = raws.iter().filter(|r| r.flagged()).map(|r| r.record.id.clone()).collect();

    let train_ids: std::collections::BTreeSet<&str> = fold.train.iter().map(String::as_str).collect();
    let train_raw: Vec<_> = raws.iter().filter(|r| train_ids.contains(r.record.id.as_str())).collect();
    if train_raw.is_empty() {
        return Err(Error::invalid("training fold has no usable utterances"));
    }
    let normalizer = fit_zscore(train_raw.iter().map(|r| &r.mfsc))?;
    // Shape statistics come from the genuine 25 Hz frames, not interpolated ones.
    let shapes: Vec<_> = train_raw.iter().flat_map(|r| r.landmarks_25.iter().cloned()).collect();
    let (alignment, aligned) = gpa_align(&shapes, &GpaConfig::default())?;
    let pca = fit_pca(&aligned, cfg.pca)?;

    let features = raws
        .iter()
        .map(|r| to_features(r, &normalizer, &alignment, &pca))
        .collect::<Result<Vec<_>>>()?;

    let present = |ids: &[String]| {
        let have: std::collections::BTreeSet<&str> = features.iter().map(|f| f.id.as_str()).collect();
        ids.iter().filter(|i| have.contains(i.as_str())).count()
    };
    let report = PrepareReport {
        utterances: features.len(),
        skipped,
        flagged,
        frames: features.iter().map(FeatureUtterance::len).sum(),
        fold: cfg.fold,
        fold_sizes: SplitSizes {
            train: present(&fold.train),
            validation: present(&fold.validation),
            test: present(&plan.test),
        },
        d: pca.d,
        variance_covered: pca.variance_covered,
        gpa_iterations: alignment.iterations,
        gpa_converged: alignment.converged,
    };

    std::fs::create_dir_all(&cfg.paths.work_dir).map_err(|e| Error::io(&cfg.paths.work_dir, e))?;
    normalizer.save(&cfg.work("normalizer.json"))?;
    write_json(&cfg.work("alignment.json"), &alignment)?;
    write_json(&cfg.work("shape_model.json"), &pca)?;
    write_json(&cfg.work("folds.json"), &plan)?;
    write_json(&cfg.work("features.json"), &features)?;
    write_json(&cfg.work("prepare.json"), &report)?;
    Ok(report)
}

/// Features from a prepared work directory, split by the configured fold.
pub fn load_splits(cfg: &RunConfig) -> Result<Splits> {
    let features: Vec<FeatureUtterance> = read_json(&cfg.work("features.json"))?;
    let plan: FoldPlan = read_json(&cfg.work("folds.json"))?;
    let fold = plan.fold(cfg.fold)?;
    let pick = |ids: &[String]| -> Vec<FeatureUtterance> {
        let set: std::collections::BTreeSet<&str> = ids.iter().map(String::as_str).collect();
        features.iter().filter(|f| set.contains(f.id.as_str())).cloned().collect()
    };
    Ok(Splits {
        train: pick(&fold.train),
        validation: pick(&fold.validation),
        test: pick(&plan.test),
    })
}

fn input_shape(ka: usize) -> Shape3 {
    Shape3::new(MEL_BANDS, ka, 1)
}

fn params_per_frame(utts: &[FeatureUtterance]) -> Result<usize> {
    utts.iter()
        .find_map(|u| u.params.first())
        .map(|p| p.coeffs.len())
        .ok_or_else(|| Error::invalid("no shape parameters in training data"))
}

/// Train the emotion classifier on frame-level examples. Validation loss is
/// logged per epoch unless `validation` is empty.
pub fn train_dern(
    train_set: &[FeatureUtterance],
    validation: &[FeatureUtterance],
    ka: usize,
    section: &NetSection<DernConfig>,
    run_seed: u64,
) -> Result<(Network, Vec<EpochLog>)> {
    let seed = derive_seed(run_seed, DERN_TAG);
    let mut net = Network::new(input_shape(ka), &dern_layers(&section.arch), seed)?;
    let data = WindowDataset::new(train_set, |_| true, ka, 1, ExampleKind::Emotion);
    let val = WindowDataset::new(validation, |_| true, ka, 1, ExampleKind::Emotion);
    let tc = TrainConfig {
        seed: seed ^ section.train.seed,
        ..section.train.clone()
    };
    let log = train(&mut net, &data, Some(&val).filter(|v| !v.is_empty()), Loss::CrossEntropy, &tc)?;
    Ok((net, log))
}

/// Train a shape regressor on one emotion's utterances, or on all of them
/// when `emotion` is `None` (the combined baseline).
pub fn train_dsrn(
    train_set: &[FeatureUtterance],
    validation: &[FeatureUtterance],
    emotion: Option<Emotion>,
    ka: usize,
    kv: usize,
    section: &NetSection<DsrnConfig>,
    run_seed: u64,
) -> Result<(Network, Vec<EpochLog>)> {
    let d = params_per_frame(train_set)?;
    let seed = derive_seed(run_seed, emotion.map_or(COMBINED_TAG, emotion_tag));
    let mut net = Network::new(input_shape(ka), &dsrn_layers(&section.arch, d * kv)?, seed)?;
    let select = |u: &FeatureUtterance| emotion.is_none_or(|e| u.emotion == e);
    let data = WindowDataset::new(train_set, select, ka, kv, ExampleKind::Shape);
    if data.is_empty() {
        return Err(Error::invalid(format!(
            "no training utterances for {}",
            emotion.map_or("any emotion".to_string(), |e| e.to_string())
        )));
    }
    let val = WindowDataset::new(validation, select, ka, kv, ExampleKind::Shape);
    let tc = TrainConfig {
        seed: seed ^ section.train.seed,
        ..section.train.clone()
    };
    let log = train(&mut net, &data, Some(&val).filter(|v| !v.is_empty()), Loss::Mse, &tc)?;
    Ok((net, log))
}

fn model_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.work(&format!("models/{name}.emofnet"))
}

fn dsrn_name(emotion: Option<Emotion>) -> String {
    match emotion {
        Some(e) => format!("dsrn_{}", e.name()),
        None => "dsrn_combined".to_string(),
    }
}

fn save_trained(cfg: &RunConfig, name: &str, net: &Network, log: &[EpochLog]) -> Result<PathBuf> {
    let path = model_path(cfg, name);
    let dir = path.parent().expect("model path has a parent");
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = BTreeMap::from([
        ("name".to_string(), name.to_string()),
        ("ka".to_string(), cfg.ka.to_string()),
        ("kv".to_string(), cfg.kv.to_string()),
        ("fold".to_string(), cfg.fold.to_string()),
        ("run_seed".to_string(), cfg.seed.to_string()),
    ]);
    save_model(&path, net, &meta)?;
    write_json(&cfg.work(&format!("logs/{name}.json")), &log)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub name: String,
    pub path: PathBuf,
    pub epochs: Vec<EpochLog>,
}

pub fn cmd_train_dern(cfg: &RunConfig) -> Result<TrainedModel> {
    let splits = load_splits(cfg)?;
    let (net, epochs) = train_dern(&splits.train, &splits.validation, cfg.ka, &cfg.dern, cfg.seed)?;
    let path = save_trained(cfg, "dern", &net, &epochs)?;
    Ok(TrainedModel {
        name: "dern".into(),
        path,
        epochs,
    })
}

/// Which shape regressors `cmd_train_dsrn` should fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsrnSelection {
    One(Emotion),
    AllEmotions,
    Combined,
}

pub fn cmd_train_dsrn(cfg: &RunConfig, which: DsrnSelection) -> Result<Vec<TrainedModel>> {
    let splits = load_splits(cfg)?;
    let targets: Vec<Option<Emotion>> = match which {
        DsrnSelection::One(e) => vec![Some(e)],
        DsrnSelection::AllEmotions => Emotion::ALL.iter().copied().map(Some).collect(),
        DsrnSelection::Combined => vec![None],
    };
    targets
        .into_iter()
        .map(|e| {
            let name = dsrn_name(e);
            let (net, epochs) =
                train_dsrn(&splits.train, &splits.validation, e, cfg.ka, cfg.kv, &cfg.dsrn, cfg.seed)?;
            let path = save_trained(cfg, &name, &net, &epochs)?;
            log::info!("trained {name}");
            Ok(TrainedModel { name, path, epochs })
        })
        .collect()
}

fn load_net(cfg: &RunConfig, name: &str) -> Result<Network> {
    let path = model_path(cfg, name);
    if !path.exists() {
        return Err(Error::MissingModel(format!("{} (run training first)", path.display())));
    }
    Ok(load_model(&path)?.0)
}

fn load_bank(cfg: &RunConfig, d: usize) -> Result<DsrnBank> {
    let models = Emotion::ALL
        .iter()
        .map(|&e| Ok((e, load_net(cfg, &dsrn_name(Some(e)))?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    DsrnBank::new(models, cfg.kv, d)
}

/// Utterance-level decision from the classifier's per-frame labels.
pub fn utterance_decision(dern: &Network, seq: &SpectralSequence, ka: usize) -> Result<UtteranceDecision> {
    let labels = predict_frame_emotions(dern, seq, ka)?;
    decide(&utterance_histogram(&labels)?, TOP_ONE_THRESHOLD)
}

/// Squared shape-parameter error under three conventions.
///
/// * `per_coefficient`: mean over every entry of every window (the training loss).
/// * `per_window`: mean over windows of the summed squared error of the `d·kv` entries.
/// * `per_frame`: mean over frames of the summed squared error of the `d`
///   parameters after overlap averaging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeErrors {
    pub per_coefficient: f64,
    pub per_window: f64,
    pub per_frame: f64,
    pub windows: usize,
    pub frames: usize,
}

/// Shape errors of `regressor` on `utts`, routing utterance `i` with `decisions[i]`.
pub fn shape_errors<R: WindowRegressor + ?Sized>(
    regressor: &R,
    utts: &[FeatureUtterance],
    decisions: &[UtteranceDecision],
    ka: usize,
) -> Result<ShapeErrors> {
    if utts.len() != decisions.len() {
        return Err(Error::mismatch(utts.len(), decisions.len()));
    }
    let (kv, d) = (regressor.kv(), regressor.params_per_frame());
    let (mut window_sq, mut frame_sq) = (0.0, 0.0);
    let (mut windows, mut frames) = (0, 0);
    for (u, dec) in utts.iter().zip(decisions) {
        if u.is_empty() {
            continue;
        }
        let estimates = (0..u.len())
            .map(|j| fuse_estimate(regressor, &u.mfsc.window(j, ka)?, dec))
            .collect::<Result<Vec<_>>>()?;
        for (j, est) in estimates.iter().enumerate() {
            let target = shape_window(&u.params, j, kv)?.vector;
            window_sq += est.vector.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        windows += estimates.len();
        let track = overlap_average(&estimates, kv)?;
        for (est, truth) in track.frames.iter().zip(&u.params) {
            frame_sq += est.coeffs.iter().zip(&truth.coeffs).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        frames += track.len();
    }
    if windows == 0 {
        return Err(Error::invalid("no frames to evaluate"));
    }
    Ok(ShapeErrors {
        per_coefficient: window_sq / (windows * kv * d) as f64,
        per_window: window_sq / windows as f64,
        per_frame: frame_sq / frames as f64,
        windows,
        frames,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCell {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub utterances: usize,
    /// Utterance-level accuracy of the top decision, per true emotion.
    pub accuracy: BTreeMap<Emotion, AccuracyCell>,
    pub overall_accuracy: f64,
    /// Keys: `dern+dsrn`, `oracle+dsrn`, `all-combined`.
    pub mse: BTreeMap<String, ShapeErrors>,
    pub units: String,
}

/// Score a trained cascade on `utts`. `combined` is optional so the report can
/// be produced before the baseline exists.
pub fn evaluate_models(
    dern: &Network,
    bank: &DsrnBank,
    combined: Option<&CombinedRegressor>,
    utts: &[FeatureUtterance],
    ka: usize,
) -> Result<EvaluationReport> {
    let predicted = utts
        .iter()
        .map(|u| utterance_decision(dern, &u.mfsc, ka))
        .collect::<Result<Vec<_>>>()?;
    let oracle: Vec<_> = utts.iter().map(|u| UtteranceDecision::certain(u.emotion)).collect();

    let mut accuracy = BTreeMap::new();
    for (u, dec) in utts.iter().zip(&predicted) {
        let cell = accuracy.entry(u.emotion).or_insert(AccuracyCell {
            correct: 0,
            total: 0,
            accuracy: 0.0,
        });
        cell.total += 1;
        cell.correct += usize::from(dec.e_star == u.emotion);
    }
    let mut correct = 0;
    for cell in accuracy.values_mut() {
        cell.accuracy = cell.correct as f64 / cell.total as f64;
        correct += cell.correct;
    }

    let mut mse = BTreeMap::new();
    mse.insert("dern+dsrn".to_string(), shape_errors(bank, utts, &predicted, ka)?);
    mse.insert("oracle+dsrn".to_string(), shape_errors(bank, utts, &oracle, ka)?);
    if let Some(c) = combined {
        mse.insert("all-combined".to_string(), shape_errors(c, utts, &oracle, ka)?);
    }
    Ok(EvaluationReport {
        utterances: utts.len(),
        accuracy,
        overall_accuracy: correct as f64 / utts.len().max(1) as f64,
        mse,
        units: "squared error in PCA shape-parameter space".into(),
    })
}

/// Evaluate on the held-out test utterances and write `evaluation.json`.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvaluationReport> {
    let splits = load_splits(cfg)?;
    if splits.test.is_empty() {
        return Err(Error::invalid("test split is empty"));
    }
    let pca: ShapeModelPca = read_json(&cfg.work("shape_model.json"))?;
    let dern = load_net(cfg, "dern")?;
    let bank = load_bank(cfg, pca.d)?;
    let combined_path = model_path(cfg, &dsrn_name(None));
    let combined = if combined_path.exists() {
        Some(CombinedRegressor::new(load_model(&combined_path)?.0, cfg.kv, pca.d)?)
    } else {
        log::warn!("no combined model; skipping the all-combined condition");
        None
    };
    let report = evaluate_models(&dern, &bank, combined.as_ref(), &splits.test, cfg.ka)?;
    write_json(&cfg.work("evaluation.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimationMetadata {
    pub wav: PathBuf,
    pub frames: usize,
    pub frame_rate: u32,
    pub ka: usize,
    pub kv: usize,
    pub d: usize,
    pub decision: UtteranceDecision,
    /// Landmarks are in the GPA-normalized frame of the shape model.
    pub coordinates: String,
    pub svg_frames: usize,
}

/// WAV -> landmark track, with the decision and provenance in `metadata.json`.
pub fn cmd_animate(cfg: &RunConfig, wav: &Path, out_dir: &Path, render_svg: bool) -> Result<AnimationMetadata> {
    let normalizer = Normalizer::load(&cfg.work("normalizer.json"))?;
    let pca: ShapeModelPca = read_json(&cfg.work("shape_model.json"))?;
    let dern = load_net(cfg, "dern")?;
    let bank = load_bank(cfg, pca.d)?;

    let clip = read_wav(wav)?;
    let seq = normalizer.apply(&extract_mfsc(&clip, &cfg.frontend)?)?;
    let decision = utterance_decision(&dern, &seq, cfg.ka)?;
    let anim = animate(&bank, &seq, cfg.ka, &decision, &pca)?;
    if anim.landmarks.iter().any(|s| s.points.iter().flatten().any(|v| !v.is_finite())) {
        return Err(Error::Degenerate("non-finite landmarks in animation".into()));
    }

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_landmark_csv(&out_dir.join("landmarks.csv"), &anim.landmarks)?;
    write_track_csv(&out_dir.join("params.csv"), &anim.track)?;
    write_track_json(&out_dir.join("track.json"), &anim.track)?;
    let svg_frames = if render_svg {
        write_svg_frames(&out_dir.join("svg"), &anim.landmarks, 480.0)?
    } else {
        0
    };
    let meta = AnimationMetadata {
        wav: wav.to_path_buf(),
        frames: anim.landmarks.len(),
        frame_rate: FRAME_RATE,
        ka: cfg.ka,
        kv: cfg.kv,
        d: pca.d,
        decision,
        coordinates: "gpa-normalized".into(),
        svg_frames,
    };
    write_json(&out_dir.join("metadata.json"), &meta)?;
    Ok(meta)
}

/// Load a previously written fold plan.
pub fn load_fold_plan(cfg: &RunConfig) -> Result<FoldPlan> {
    read_json(&cfg.work("folds.json"))
}

/// Fitted shape alignment from a prepared work directory.
pub fn load_alignment(cfg: &RunConfig) -> Result<AlignmentModel> {
    read_json(&cfg.work("alignment.json"))
}
