//! Utterance-level emotion decision from per-frame classifier labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const EMOTION_COUNT: usize = 7;

/// Probability of the top emotion above which the runner-up is dropped.
pub const TOP_ONE_THRESHOLD: f64 = 0.65;

/// The seven SAVEE categories, indexed in alphabetical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Happiness,
    Neutral,
    Sadness,
    Surprise,
}

impl Emotion {
    pub const ALL: [Emotion; EMOTION_COUNT] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Happiness,
        Emotion::Neutral,
        Emotion::Sadness,
        Emotion::Surprise,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::invalid(format!("emotion index {i} out of range")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Happiness => "happiness",
            Emotion::Neutral => "neutral",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    /// Accepts full names, common adjectives and SAVEE file prefixes.
    fn from_str(s: &str) -> Result<Self> {
        let e = match s.trim().to_ascii_lowercase().as_str() {
            "anger" | "angry" | "a" => Emotion::Anger,
            "disgust" | "disgusted" | "d" => Emotion::Disgust,
            "fear" | "fearful" | "f" => Emotion::Fear,
            "happiness" | "happy" | "h" => Emotion::Happiness,
            "neutral" | "n" => Emotion::Neutral,
            "sadness" | "sad" | "sa" => Emotion::Sadness,
            "surprise" | "surprised" | "su" => Emotion::Surprise,
            other => {
                return Err(Error::UnknownEmotion {
                    label: other.to_string(),
                    context: "expected one of anger, disgust, fear, happiness, neutral, sadness, surprise".into(),
                })
            }
        };
        Ok(e)
    }
}

/// Fraction of frames assigned to each emotion.
pub fn utterance_histogram(labels: &[Emotion]) -> Result<[f64; EMOTION_COUNT]> {
    if labels.is_empty() {
        return Err(Error::invalid("no frame predictions"));
    }
    let mut counts = [0usize; EMOTION_COUNT];
    for e in labels {
        counts[e.index()] += 1;
    }
    let t = labels.len() as f64;
    Ok(counts.map(|c| c as f64 / t))
}

/// Top-two emotions with renormalized fusion weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceDecision {
    pub e_star: Emotion,
    pub e_star2: Emotion,
    pub p_star: f64,
    pub p_star2: f64,
    pub histogram: [f64; EMOTION_COUNT],
}

impl UtteranceDecision {
    /// A decision that routes everything to one emotion.
    pub fn certain(e: Emotion) -> Self {
        let mut histogram = [0.0; EMOTION_COUNT];
        histogram[e.index()] = 1.0;
        let runner_up = Emotion::ALL[if e.index() == 0 { 1 } else { 0 }];
        Self {
            e_star: e,
            e_star2: runner_up,
            p_star: 1.0,
            p_star2: 0.0,
            histogram,
        }
    }
}

fn argmax_excluding(p: &[f64; EMOTION_COUNT], skip: Option<usize>) -> usize {
    let mut best = usize::MAX;
    for (i, &v) in p.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        // Strict comparison keeps the lowest index on ties.
        if best == usize::MAX || v > p[best] {
            best = i;
        }
    }
    best
}

pub fn decide(p: &[f64; EMOTION_COUNT], threshold: f64) -> Result<UtteranceDecision> {
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("emotion probabilities must be finite and non-negative"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "emotion probabilities sum to {sum}, expected 1"
        )));
    }
    let first = argmax_excluding(p, None);
    let second = argmax_excluding(p, Some(first));
    let top = p[first];
    let runner = if top > threshold { 0.0 } else { p[second] };
    let p_star = top / (top + runner);
    Ok(UtteranceDecision {
        e_star: Emotion::ALL[first],
        e_star2: Emotion::ALL[second],
        p_star,
        p_star2: 1.0 - p_star,
        histogram: *p,
    })
}
