//! Ranked candidate chains for a loop fragment.

pub mod enumerate;
pub mod features;
pub mod plugin;
pub mod rules;
pub mod vocabulary;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::frontend::LoopFragment;
pub use enumerate::enumerate_fallback;
pub use features::{featurize, FeatureRecord};
pub use plugin::ExternalPredictor;
pub use vocabulary::{parse_label, ApiVocabulary, BaseOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Heuristic,
    Enumerated,
    /// Produced by an external predictor process.
    Plugin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateChain {
    pub ops: Vec<BaseOp>,
    /// In `[0, 1]`, non-increasing along a ranked list.
    pub score: f64,
    pub origin: Origin,
}

impl CandidateChain {
    pub fn new(ops: Vec<BaseOp>, origin: Origin) -> Self {
        CandidateChain { ops, score: 1.0, origin }
    }

    /// Comma-separated op names, e.g. `filter,reduce`.
    pub fn label(&self) -> String {
        self.ops.iter().map(|o| o.name()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for CandidateChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ops.iter().map(|o| format!("{o}()")).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("no prediction rule applies to fragment {0}")]
    EmptyPrediction(usize),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("fallback length must be between 1 and 3, got {0}")]
    InvalidFallbackLength(usize),
    #[error("external predictor failed: {0}")]
    Plugin(String),
}

/// A source of ranked chains.
pub trait Predictor: Send + Sync {
    fn name(&self) -> &str;

    /// Ranked vocabulary-valid chains, best first.
    fn rank(&self, fragment: &LoopFragment) -> Result<Vec<Vec<BaseOp>>, PredictError>;

    fn origin(&self) -> Origin {
        Origin::Heuristic
    }
}

/// The rule-based default.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicPredictor;

impl Predictor for HeuristicPredictor {
    fn name(&self) -> &str {
        "heuristic"
    }

    fn rank(&self, fragment: &LoopFragment) -> Result<Vec<Vec<BaseOp>>, PredictError> {
        if !fragment.is_translatable() {
            return Ok(Vec::new());
        }
        Ok(rules::rank(&featurize(fragment)))
    }
}

/// Returns the same ranked list for every fragment.
#[derive(Debug, Clone)]
pub struct StaticPredictor {
    chains: Vec<Vec<BaseOp>>,
}

impl StaticPredictor {
    pub fn new(chains: Vec<Vec<BaseOp>>) -> Self {
        StaticPredictor { chains }
    }

    /// Builds from labels such as `'flatMap(),count()'`; invalid labels are
    /// dropped.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        StaticPredictor {
            chains: labels.iter().filter_map(|l| parse_label(l.as_ref())).collect(),
        }
    }
}

impl Predictor for StaticPredictor {
    fn name(&self) -> &str {
        "static"
    }

    fn rank(&self, _fragment: &LoopFragment) -> Result<Vec<Vec<BaseOp>>, PredictError> {
        Ok(self.chains.clone())
    }

    fn origin(&self) -> Origin {
        Origin::Plugin
    }
}

fn assign_scores(chains: &mut [CandidateChain]) {
    let n = chains.len();
    for (i, c) in chains.iter_mut().enumerate() {
        c.score = (n - i) as f64 / n as f64;
    }
}

/// Top-k candidates from `predictor`, with scores.
pub fn predict_with(predictor: &dyn Predictor, fragment: &LoopFragment, k: usize) -> Result<Vec<CandidateChain>, PredictError> {
    if k == 0 {
        return Err(PredictError::InvalidK);
    }
    let vocab = ApiVocabulary::new();
    let mut out: Vec<CandidateChain> = Vec::new();
    for ops in predictor.rank(fragment)? {
        if vocab.contains(&ops) && !out.iter().any(|c| c.ops == ops) {
            out.push(CandidateChain::new(ops, predictor.origin()));
        }
    }
    out.truncate(k);
    assign_scores(&mut out);
    Ok(out)
}

/// Top-k candidates from the default predictor.
pub fn predict_top_k(fragment: &LoopFragment, k: usize) -> Result<Vec<CandidateChain>, PredictError> {
    let out = predict_with(&HeuristicPredictor, fragment, k)?;
    if out.is_empty() {
        return Err(PredictError::EmptyPrediction(fragment.id));
    }
    Ok(out)
}

/// Predicted candidates followed, when `fallback_max_len` is set, by the
/// enumeration with duplicates removed.
pub fn candidate_stream(
    predictor: &dyn Predictor,
    fragment: &LoopFragment,
    k: usize,
    fallback_max_len: Option<usize>,
) -> Result<Vec<CandidateChain>, PredictError> {
    let mut out = predict_with(predictor, fragment, k)?;
    if let Some(max_len) = fallback_max_len {
        if !(1..=vocabulary::MAX_CHAIN_LEN).contains(&max_len) {
            return Err(PredictError::InvalidFallbackLength(max_len));
        }
        for c in enumerate_fallback(fragment, max_len) {
            if !out.iter().any(|o| o.ops == c.ops) {
                out.push(c);
            }
        }
    }
    if out.is_empty() {
        return Err(PredictError::EmptyPrediction(fragment.id));
    }
    assign_scores(&mut out);
    Ok(out)
}
