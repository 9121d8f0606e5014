//! Ranking rules for the default predictor.
//!
//! The first candidate composes one operation per pipeline stage in body
//! order. The remaining candidates come from the single-pattern rules:
//!
//! | rule | pattern                                   | chains                          |
//! |------|-------------------------------------------|---------------------------------|
//! | R1   | condition guarding an append              | `filter`                        |
//! | R2   | transformed value appended                | `map`                           |
//! | R3   | `+=`-style accumulation                   | `reduce`, then `sum`            |
//! | R4   | condition guarding an accumulation        | `filter,reduce`, `filter,sum`   |
//! | R5   | inner items of a nested loop appended     | `flatMap`                       |
//! | R6   | two datasets matched on a key             | `join`                          |
//! | R7   | output extended with another dataset      | `union`                         |
//! | R8   | counting (`+= 1`)                         | `count`, `filter,count`         |
//! | R9   | output sorted after the loop              | `sortBy`                        |

use super::features::{FeatureRecord, StageKind};
use super::vocabulary::{is_type_consistent, BaseOp, MAX_CHAIN_LEN};
use BaseOp::*;

/// Ranked chains, best first, without duplicates.
pub fn rank(f: &FeatureRecord) -> Vec<Vec<BaseOp>> {
    let mut out: Vec<Vec<BaseOp>> = Vec::new();
    let mut push = |chain: Vec<BaseOp>| {
        if chain.len() <= MAX_CHAIN_LEN && is_type_consistent(&chain) && !out.contains(&chain) {
            out.push(chain);
        }
    };

    // R6
    if f.key_match_join {
        if f.join_is_canonical {
            push(vec![Join]);
            push(vec![Join, Map]);
        } else {
            push(vec![Join, Map]);
            push(vec![Join]);
        }
    }
    // R7
    let identity_append = f.stages == [StageKind::Append];
    if f.extends_existing_output && identity_append {
        push(vec![Union]);
    }

    let accumulate = f.stages.contains(&StageKind::Accumulate);
    if let Some(chain) = compose(f, Reduce) {
        push(chain);
        if accumulate {
            if let Some(alt) = compose(f, Sum) {
                push(alt);
            }
        }
    }

    let transforms = f.stages.contains(&StageKind::Transform);
    // R4
    if f.has_condition && f.has_accumulation && !f.count_accumulation {
        push(vec![Filter, Reduce]);
        push(vec![Filter, Sum]);
    }
    // R1
    if f.has_condition && f.has_append {
        push(vec![Filter]);
    }
    // R2
    if f.has_append && (transforms || identity_append) {
        push(vec![Map]);
    }
    // R3
    if f.has_accumulation && !f.count_accumulation {
        if transforms || f.has_transform_call {
            push(vec![Map, Reduce]);
            push(vec![Map, Sum]);
        }
        push(vec![Reduce]);
        push(vec![Sum]);
    }
    // R5
    if f.appends_inner_items || f.stages.first() == Some(&StageKind::Flatten) {
        push(vec![FlatMap]);
    }
    // R8
    if f.count_accumulation {
        push(vec![Count]);
        if f.has_condition {
            push(vec![Filter, Count]);
        }
    }
    // R9
    if f.sorted_output {
        push(vec![SortBy]);
    }
    if identity_append {
        push(vec![Collect]);
    }
    out
}

/// One operation per stage, with `terminal` for plain accumulation.
fn compose(f: &FeatureRecord, terminal: BaseOp) -> Option<Vec<BaseOp>> {
    if f.stages.is_empty() || f.key_match_join {
        return None;
    }
    let mut chain = Vec::new();
    for stage in &f.stages {
        match stage {
            StageKind::Flatten => chain.push(FlatMap),
            StageKind::Condition => chain.push(Filter),
            StageKind::MembershipGuard => chain.push(Distinct),
            StageKind::Transform => chain.push(Map),
            StageKind::Append => {}
            StageKind::Accumulate => chain.push(terminal),
            StageKind::Count => chain.push(Count),
            StageKind::Group => {
                chain.push(Map);
                chain.push(GroupByKey);
            }
        }
    }
    let ends_in_aggregate = chain.last().is_some_and(|op| op.is_aggregator());
    if f.sorted_output && !ends_in_aggregate {
        chain.push(SortBy);
    }
    if chain.is_empty() {
        chain.push(Map);
    }
    Some(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> FeatureRecord {
        FeatureRecord {
            has_condition: false,
            has_append: false,
            has_accumulation: false,
            accumulation_operator: None,
            has_transform_call: false,
            nested_depth: 1,
            dataset_count: 1,
            appends_inner_items: false,
            has_transform: false,
            membership_guard: false,
            extends_existing_output: false,
            key_match_join: false,
            join_is_canonical: false,
            sorted_output: false,
            sort_descending: false,
            count_accumulation: false,
            neutral_init: true,
            group_pattern: false,
            stages: vec![],
        }
    }

    #[test]
    fn conditional_accumulation_prefers_filter_reduce() {
        let f = FeatureRecord {
            has_condition: true,
            has_accumulation: true,
            accumulation_operator: Some("+".into()),
            stages: vec![StageKind::Condition, StageKind::Accumulate],
            ..base()
        };
        let r = rank(&f);
        assert_eq!(&r[..2], &[vec![Filter, Reduce], vec![Filter, Sum]]);
    }

    #[test]
    fn no_signal_no_chain() {
        assert!(rank(&base()).is_empty());
    }

    #[test]
    fn sort_goes_last() {
        let f = FeatureRecord {
            has_append: true,
            membership_guard: true,
            sorted_output: true,
            stages: vec![StageKind::MembershipGuard, StageKind::Append],
            ..base()
        };
        assert_eq!(rank(&f)[0], vec![Distinct, SortBy]);
    }
}
