//! The label vocabulary: type-consistent chains of base operations.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BaseOp {
    Map,
    Filter,
    Reduce,
    Join,
    Union,
    SortBy,
    GroupByKey,
    FlatMap,
    Sum,
    Count,
    Distinct,
    Take,
    Collect,
}

impl BaseOp {
    pub const ALL: [BaseOp; 13] = [
        BaseOp::Map,
        BaseOp::Filter,
        BaseOp::Reduce,
        BaseOp::Join,
        BaseOp::Union,
        BaseOp::SortBy,
        BaseOp::GroupByKey,
        BaseOp::FlatMap,
        BaseOp::Sum,
        BaseOp::Count,
        BaseOp::Distinct,
        BaseOp::Take,
        BaseOp::Collect,
    ];

    /// Method name in the target API.
    pub fn name(self) -> &'static str {
        match self {
            BaseOp::Map => "map",
            BaseOp::Filter => "filter",
            BaseOp::Reduce => "reduce",
            BaseOp::Join => "join",
            BaseOp::Union => "union",
            BaseOp::SortBy => "sortBy",
            BaseOp::GroupByKey => "groupByKey",
            BaseOp::FlatMap => "flatMap",
            BaseOp::Sum => "sum",
            BaseOp::Count => "count",
            BaseOp::Distinct => "distinct",
            BaseOp::Take => "take",
            BaseOp::Collect => "collect",
        }
    }

    pub fn from_name(name: &str) -> Option<BaseOp> {
        BaseOp::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn is_aggregator(self) -> bool {
        matches!(self, BaseOp::Reduce | BaseOp::Sum | BaseOp::Count)
    }

    /// Operations that may only end a chain.
    pub fn is_terminal(self) -> bool {
        self.is_aggregator() || matches!(self, BaseOp::Collect | BaseOp::Take)
    }

    /// Operations that may only start a chain.
    pub fn is_binary(self) -> bool {
        matches!(self, BaseOp::Join | BaseOp::Union)
    }
}

impl fmt::Display for BaseOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether a chain obeys the typing rules.
pub fn is_type_consistent(ops: &[BaseOp]) -> bool {
    !ops.is_empty()
        && ops.iter().enumerate().all(|(i, op)| {
            (!op.is_terminal() || i + 1 == ops.len()) && (!op.is_binary() || i == 0)
        })
}

/// Orders chains by length, then lexicographically by method names.
pub fn chain_order(a: &[BaseOp], b: &[BaseOp]) -> std::cmp::Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| a.iter().map(|o| o.name()).cmp(b.iter().map(|o| o.name())))
}

pub const MAX_CHAIN_LEN: usize = 3;

#[derive(Debug, Clone)]
pub struct ApiVocabulary {
    labels: Vec<Vec<BaseOp>>,
}

impl Default for ApiVocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl ApiVocabulary {
    /// Every type-consistent chain of length 1 to 3.
    pub fn new() -> Self {
        let mut labels: Vec<Vec<BaseOp>> = Vec::new();
        let mut frontier: Vec<Vec<BaseOp>> = vec![vec![]];
        for _ in 0..MAX_CHAIN_LEN {
            let mut next = Vec::new();
            for prefix in &frontier {
                for op in BaseOp::ALL {
                    let mut chain = prefix.clone();
                    chain.push(op);
                    if is_type_consistent(&chain) {
                        labels.push(chain.clone());
                        if !op.is_terminal() {
                            next.push(chain);
                        }
                    }
                }
            }
            frontier = next;
        }
        labels.sort_by(|a, b| chain_order(a, b));
        ApiVocabulary { labels }
    }

    pub fn base_ops(&self) -> &'static [BaseOp] {
        &BaseOp::ALL
    }

    pub fn labels(&self) -> &[Vec<BaseOp>] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, ops: &[BaseOp]) -> bool {
        ops.len() <= MAX_CHAIN_LEN && is_type_consistent(ops)
    }
}

/// Parses a label such as `filter,reduce`, `'map(),distinct()'` or
/// `flatMap, count`.
pub fn parse_label(text: &str) -> Option<Vec<BaseOp>> {
    let cleaned = text.trim().trim_matches(|c| c == '\'' || c == '"');
    let ops: Option<Vec<BaseOp>> = cleaned
        .split(',')
        .map(|part| {
            let part = part.trim().trim_matches(|c| c == '\'' || c == '"');
            BaseOp::from_name(part.strip_suffix("()").unwrap_or(part).trim())
        })
        .collect();
    ops.filter(|ops| ApiVocabulary::new().contains(ops))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typing_rules() {
        use BaseOp::*;
        assert!(is_type_consistent(&[Filter, Reduce]));
        assert!(is_type_consistent(&[Join, Map]));
        assert!(!is_type_consistent(&[Reduce, Map]));
        assert!(!is_type_consistent(&[Map, Join]));
        assert!(!is_type_consistent(&[Collect, Count]));
        assert!(!is_type_consistent(&[]));
    }

    #[test]
    fn labels_are_sorted_and_unique() {
        let v = ApiVocabulary::new();
        for w in v.labels().windows(2) {
            assert_eq!(chain_order(&w[0], &w[1]), std::cmp::Ordering::Less);
        }
        assert_eq!(v.labels()[0], vec![BaseOp::Collect]);
    }

    #[test]
    fn label_parsing() {
        use BaseOp::*;
        assert_eq!(parse_label("'map(),distinct()'"), Some(vec![Map, Distinct]));
        assert_eq!(parse_label("flatMap, count"), Some(vec![FlatMap, Count]));
        assert_eq!(parse_label("take"), Some(vec![Take]));
        assert_eq!(parse_label("count,map"), None);
        assert_eq!(parse_label("explode"), None);
    }
}
