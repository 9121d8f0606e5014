//! Exhaustive fallback: every label, shortest first.

use super::vocabulary::ApiVocabulary;
use super::{CandidateChain, Origin};
use crate::frontend::{InitState, LoopFragment};

/// Number of datasets a binary operation could combine: the inputs, plus the
/// output when it already holds data before the loop.
pub fn dataset_arity(fragment: &LoopFragment) -> usize {
    let extends = fragment
        .output_datasets
        .iter()
        .any(|o| fragment.context.init_of(o) == InitState::Modified);
    fragment.input_datasets.len() + usize::from(extends)
}

/// Labels of length at most `max_len` that fit the fragment's arity, in
/// length-then-lexicographic order.
pub fn enumerate_fallback(fragment: &LoopFragment, max_len: usize) -> Vec<CandidateChain> {
    let arity = dataset_arity(fragment);
    let labels: Vec<_> = ApiVocabulary::new()
        .labels()
        .iter()
        .filter(|ops| ops.len() <= max_len)
        .filter(|ops| arity >= 2 || !ops[0].is_binary())
        .cloned()
        .collect();
    let n = labels.len();
    labels
        .into_iter()
        .enumerate()
        .map(|(i, ops)| CandidateChain {
            ops,
            score: (n - i) as f64 / n as f64,
            origin: Origin::Enumerated,
        })
        .collect()
}
