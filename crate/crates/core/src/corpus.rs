//! Corpus ingestion: manifests, fold plans and paired training examples.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{extract_mfsc, read_wav, FrontendConfig, Normalizer, SpectralSequence};
use crate::emotion::Emotion;
use crate::nn::{Dataset, Target, Tensor};
use crate::regression::image_tensor;
use crate::shape::{
    read_landmark_csv, shape_window, upsample_track, AlignmentModel, LandmarkShape, ShapeModelPca,
    ShapeParams,
};
use crate::{Error, Result};

/// Maximum tolerated difference between acoustic and upsampled visual frame counts.
pub const MAX_PAIRING_GAP: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: String,
    pub speaker: String,
    pub emotion: Emotion,
    pub wav_path: PathBuf,
    pub landmarks_path: PathBuf,
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    id: String,
    speaker: String,
    emotion: String,
    wav_path: PathBuf,
    landmarks_path: PathBuf,
}

/// Parse a `id,speaker,emotion,wav_path,landmarks_path` manifest. Relative
/// paths resolve against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<UtteranceRecord>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut records = Vec::new();
    for (n, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let row = row?;
        let line = n + 2;
        let emotion = row.emotion.parse::<Emotion>().map_err(|_| Error::UnknownEmotion {
            label: row.emotion.clone(),
            context: format!("{} line {line}, record {:?}", path.display(), row.id),
        })?;
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let rec = UtteranceRecord {
            wav_path: resolve(&row.wav_path),
            landmarks_path: resolve(&row.landmarks_path),
            id: row.id,
            speaker: row.speaker,
            emotion,
        };
        for p in [&rec.wav_path, &rec.landmarks_path] {
            if !p.is_file() {
                return Err(Error::invalid(format!(
                    "record {:?} (line {line}): missing file {}",
                    rec.id,
                    p.display()
                )));
            }
        }
        records.push(rec);
    }
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = records.iter().find(|r| !seen.insert(r.id.as_str())) {
        return Err(Error::invalid(format!("duplicate record id {:?}", dup.id)));
    }
    Ok(records)
}

pub fn write_manifest(path: &Path, records: &[UtteranceRecord]) -> Result<()> {
    let base = path.parent().unwrap_or(Path::new("."));
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["id", "speaker", "emotion", "wav_path", "landmarks_path"])?;
    for r in records {
        let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).display().to_string();
        w.write_record([
            r.id.clone(),
            r.speaker.clone(),
            r.emotion.to_string(),
            rel(&r.wav_path),
            rel(&r.landmarks_path),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Record ids per speaker.
pub fn speaker_groups(records: &[UtteranceRecord]) -> BTreeMap<String, Vec<String>> {
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in records {
        groups.entry(r.speaker.clone()).or_default().push(r.id.clone());
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<String>,
    pub validation: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub test: Vec<String>,
    pub folds: Vec<Fold>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldStrategy {
    /// Random folds stratified by emotion.
    #[default]
    Stratified,
    /// One seeded speaker is the test set; every other speaker validates one fold.
    SpeakerHoldout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoldOptions {
    pub n_folds: usize,
    pub test_fraction: f64,
    pub strategy: FoldStrategy,
}

impl Default for FoldOptions {
    fn default() -> Self {
        Self {
            n_folds: 5,
            test_fraction: 0.1,
            strategy: FoldStrategy::Stratified,
        }
    }
}

/// Split `total` items among groups proportionally, largest remainder first.
fn apportion(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let quotas: Vec<f64> = sizes.iter().map(|&s| s as f64 * total as f64 / n as f64).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())));
    let mut missing = total - alloc.iter().sum::<usize>();
    for &i in order.iter().cycle().take(sizes.len() * 2) {
        if missing == 0 {
            break;
        }
        if alloc[i] < sizes[i] {
            alloc[i] += 1;
            missing -= 1;
        }
    }
    alloc
}

pub fn make_folds(records: &[UtteranceRecord], seed: u64, opts: &FoldOptions) -> Result<FoldPlan> {
    if records.len() < 10 {
        return Err(Error::invalid(format!(
            "fold construction needs at least 10 records, got {}",
            records.len()
        )));
    }
    if opts.n_folds < 2 {
        return Err(Error::Config("n_folds must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match opts.strategy {
        FoldStrategy::Stratified => stratified(records, &mut rng, seed, opts),
        FoldStrategy::SpeakerHoldout => speaker_holdout(records, &mut rng, seed),
    }
}

fn stratified(
    records: &[UtteranceRecord],
    rng: &mut ChaCha8Rng,
    seed: u64,
    opts: &FoldOptions,
) -> Result<FoldPlan> {
    let mut by_emotion: BTreeMap<Emotion, Vec<String>> = BTreeMap::new();
    for r in records {
        by_emotion.entry(r.emotion).or_default().push(r.id.clone());
    }
    for (e, ids) in &mut by_emotion {
        if ids.len() < 2 {
            return Err(Error::invalid(format!(
                "emotion {e} has {} record(s); stratified folds need at least 2",
                ids.len()
            )));
        }
        ids.sort();
        ids.shuffle(rng);
    }
    let sizes: Vec<usize> = by_emotion.values().map(Vec::len).collect();
    let n_test = (records.len() as f64 * opts.test_fraction).round() as usize;
    let test_alloc = apportion(&sizes, n_test);

    let mut test = Vec::new();
    let mut rest = Vec::new();
    for (ids, &t) in by_emotion.values().zip(&test_alloc) {
        test.extend_from_slice(&ids[..t]);
        rest.extend_from_slice(&ids[t..]);
    }
    // Dealing the emotion-ordered remainder round-robin keeps every fold stratified.
    let mut buckets = vec![Vec::new(); opts.n_folds];
    for (k, id) in rest.iter().enumerate() {
        buckets[k % opts.n_folds].push(id.clone());
    }
    Ok(FoldPlan {
        seed,
        test,
        folds: folds_from_buckets(&buckets),
    })
}

fn speaker_holdout(records: &[UtteranceRecord], rng: &mut ChaCha8Rng, seed: u64) -> Result<FoldPlan> {
    let groups = speaker_groups(records);
    if groups.len() < 3 {
        return Err(Error::invalid(format!(
            "speaker holdout needs at least 3 speakers, got {}",
            groups.len()
        )));
    }
    let mut speakers: Vec<&String> = groups.keys().collect();
    speakers.shuffle(rng);
    let test = groups[speakers[0]].clone();
    let buckets: Vec<Vec<String>> = speakers[1..].iter().map(|s| groups[*s].clone()).collect();
    Ok(FoldPlan {
        seed,
        test,
        folds: folds_from_buckets(&buckets),
    })
}

fn folds_from_buckets(buckets: &[Vec<String>]) -> Vec<Fold> {
    (0..buckets.len())
        .map(|k| Fold {
            validation: buckets[k].clone(),
            train: buckets
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .flat_map(|(_, b)| b.iter().cloned())
                .collect(),
        })
        .collect()
}

impl FoldPlan {
    pub fn fold(&self, k: usize) -> Result<&Fold> {
        self.folds.get(k).ok_or_else(|| {
            Error::invalid(format!("fold {k} out of range ({} folds)", self.folds.len()))
        })
    }
}

/// Audio features and 100 Hz landmark track of one utterance, before any
/// corpus-level normalization.
#[derive(Debug, Clone)]
pub struct RawUtterance {
    pub record: UtteranceRecord,
    pub mfsc: SpectralSequence,
    /// The 25 Hz track as ingested.
    pub landmarks_25: Vec<LandmarkShape>,
    /// Upsampled to 100 Hz and truncated to the paired length.
    pub landmarks_100: Vec<LandmarkShape>,
    pub pairing_gap: usize,
}

impl RawUtterance {
    pub fn flagged(&self) -> bool {
        self.pairing_gap > MAX_PAIRING_GAP
    }
}

/// Load and pair one record. Tracks shorter than 4 frames are skipped (`Ok(None)`).
pub fn load_raw(record: &UtteranceRecord, cfg: &FrontendConfig) -> Result<Option<RawUtterance>> {
    let clip = read_wav(&record.wav_path)?;
    let mut mfsc = extract_mfsc(&clip, cfg)?;
    let landmarks_25 = read_landmark_csv(&record.landmarks_path)?;
    if landmarks_25.len() < 4 {
        log::warn!(
            "skipping {}: landmark track has {} frames",
            record.id,
            landmarks_25.len()
        );
        return Ok(None);
    }
    let mut landmarks_100 = upsample_track(&landmarks_25)?;
    let pairing_gap = mfsc.len().abs_diff(landmarks_100.len());
    if pairing_gap > MAX_PAIRING_GAP {
        log::warn!(
            "{}: {} acoustic vs {} visual frames",
            record.id,
            mfsc.len(),
            landmarks_100.len()
        );
    }
    let n = mfsc.len().min(landmarks_100.len());
    mfsc.truncate(n);
    landmarks_100.truncate(n);
    Ok(Some(RawUtterance {
        record: record.clone(),
        mfsc,
        landmarks_25,
        landmarks_100,
        pairing_gap,
    }))
}

/// Normalized acoustic frames paired one-to-one with shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureUtterance {
    pub id: String,
    pub speaker: String,
    pub emotion: Emotion,
    pub mfsc: SpectralSequence,
    pub params: Vec<ShapeParams>,
}

impl FeatureUtterance {
    pub fn len(&self) -> usize {
        self.mfsc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mfsc.is_empty()
    }
}

/// Apply fitted corpus statistics to one raw utterance.
pub fn to_features(
    raw: &RawUtterance,
    normalizer: &Normalizer,
    alignment: &AlignmentModel,
    pca: &ShapeModelPca,
) -> Result<FeatureUtterance> {
    let params = raw
        .landmarks_100
        .iter()
        .map(|s| pca.project(&alignment.align(s)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureUtterance {
        id: raw.record.id.clone(),
        speaker: raw.record.speaker.clone(),
        emotion: raw.record.emotion,
        mfsc: normalizer.apply(&raw.mfsc)?,
        params,
    })
}

/// Which supervision a [`WindowDataset`] yields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleKind {
    /// (spectral image, utterance emotion)
    Emotion,
    /// (spectral image, shape window)
    Shape,
}

/// Frame-level examples drawn lazily from a set of utterances.
#[derive(Debug, Clone)]
pub struct WindowDataset<'a> {
    utterances: &'a [FeatureUtterance],
    /// (utterance index, frame index)
    pub index: Vec<(usize, usize)>,
    pub ka: usize,
    pub kv: usize,
    pub kind: ExampleKind,
}

impl<'a> WindowDataset<'a> {
    /// One example per frame of every selected utterance.
    pub fn new(
        utterances: &'a [FeatureUtterance],
        select: impl Fn(&FeatureUtterance) -> bool,
        ka: usize,
        kv: usize,
        kind: ExampleKind,
    ) -> Self {
        let index = utterances
            .iter()
            .enumerate()
            .filter(|(_, u)| select(u))
            .flat_map(|(i, u)| (0..u.len()).map(move |j| (i, j)))
            .collect();
        Self {
            utterances,
            index,
            ka,
            kv,
            kind,
        }
    }

    pub fn utterance_of(&self, i: usize) -> &FeatureUtterance {
        &self.utterances[self.index[i].0]
    }

    pub fn shape_target(&self, i: usize) -> Result<Vec<f64>> {
        let (u, j) = self.index[i];
        Ok(shape_window(&self.utterances[u].params, j, self.kv)?.vector)
    }
}

impl Dataset for WindowDataset<'_> {
    fn len(&self) -> usize {
        self.index.len()
    }

    fn example(&self, i: usize) -> Result<(Tensor, Target)> {
        let (u, j) = self.index[i];
        let utt = &self.utterances[u];
        let image = image_tensor(&utt.mfsc.window(j, self.ka)?);
        let target = match self.kind {
            ExampleKind::Emotion => Target::Class(utt.emotion.index()),
            ExampleKind::Shape => Target::Values(self.shape_target(i)?),
        };
        Ok((image, target))
    }
}

/// Emotion-classifier examples over every utterance, and one shape-regression
/// set per emotion built only from utterances carrying that label.
pub fn build_examples(
    utterances: &[FeatureUtterance],
    ka: usize,
    kv: usize,
) -> (WindowDataset<'_>, BTreeMap<Emotion, WindowDataset<'_>>) {
    let dern = WindowDataset::new(utterances, |_| true, ka, kv, ExampleKind::Emotion);
    let dsrn = Emotion::ALL
        .iter()
        .map(|&e| {
            (
                e,
                WindowDataset::new(utterances, move |u| u.emotion == e, ka, kv, ExampleKind::Shape),
            )
        })
        .filter(|(_, d)| !d.is_empty())
        .collect();
    (dern, dsrn)
}
