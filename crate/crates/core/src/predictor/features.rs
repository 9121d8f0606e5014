//! Deterministic features of a loop fragment.

use serde::Serialize;

use crate::frontend::ast::*;
use crate::frontend::{InitState, LoopFragment, OperationKind};
use crate::refactor::model::{self, Shape, Sink, Stage};

/// One step of the body read as a pipeline, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Flatten,
    Condition,
    MembershipGuard,
    Transform,
    Append,
    Accumulate,
    Count,
    Group,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureRecord {
    pub has_condition: bool,
    pub has_append: bool,
    pub has_accumulation: bool,
    pub accumulation_operator: Option<String>,
    pub has_transform_call: bool,
    pub nested_depth: usize,
    pub dataset_count: usize,
    pub appends_inner_items: bool,
    /// A value other than the element itself reaches the sink.
    pub has_transform: bool,
    /// `if x not in seen: seen.add(x)`.
    pub membership_guard: bool,
    /// The output already holds data when the loop starts.
    pub extends_existing_output: bool,
    /// Nested loops over two datasets matched on a key.
    pub key_match_join: bool,
    pub join_is_canonical: bool,
    /// The output is sorted right after the loop.
    pub sorted_output: bool,
    pub sort_descending: bool,
    /// `+= 1` accumulation.
    pub count_accumulation: bool,
    /// Accumulator initialised to the operator's neutral element.
    pub neutral_init: bool,
    pub group_pattern: bool,
    pub stages: Vec<StageKind>,
}

const MUTATORS: &[&str] = &["append", "extend", "add", "insert", "appendleft"];

pub fn featurize(fragment: &LoopFragment) -> FeatureRecord {
    let ops = &fragment.operations;
    let mut f = FeatureRecord {
        has_condition: ops.iter().any(|o| o.kind == OperationKind::Conditional),
        has_append: false,
        has_accumulation: false,
        accumulation_operator: None,
        has_transform_call: false,
        nested_depth: fragment.depth,
        dataset_count: fragment.input_datasets.len(),
        appends_inner_items: false,
        has_transform: false,
        membership_guard: false,
        extends_existing_output: fragment
            .output_datasets
            .iter()
            .any(|o| fragment.context.init_of(o) == InitState::Modified),
        key_match_join: false,
        join_is_canonical: false,
        sorted_output: !fragment.context.sorted_after.is_empty(),
        sort_descending: fragment.context.sorted_after.iter().any(|(_, s)| s.reverse),
        count_accumulation: false,
        neutral_init: false,
        group_pattern: false,
        stages: Vec::new(),
    };

    // Syntactic facts, valid for any fragment.
    let mut inner_vars: Vec<String> = Vec::new();
    for stmt in fragment.body() {
        stmt.walk(&mut |s| match &s.kind {
            StmtKind::For { target, .. } => {
                if let Some(v) = target.as_name() {
                    inner_vars.push(v.to_string());
                }
            }
            StmtKind::Expr(e) => {
                if let Some((recv, method, args, _)) = e.as_method_call() {
                    let to_output = recv
                        .root_name()
                        .is_some_and(|r| fragment.output_datasets.iter().any(|o| o == r));
                    if to_output && MUTATORS.contains(&method) {
                        f.has_append = true;
                        f.has_transform_call |= args.iter().any(contains_call);
                        if args.iter().any(|a| inner_vars.iter().any(|v| a.mentions(v))) {
                            f.appends_inner_items = true;
                        }
                    } else {
                        f.has_transform_call = true;
                    }
                } else {
                    f.has_transform_call = true;
                }
            }
            StmtKind::AugAssign { op, value, .. } => {
                f.has_accumulation = true;
                f.accumulation_operator.get_or_insert_with(|| op.symbol().to_string());
                f.has_transform_call |= contains_call(value);
                if *op == BinOp::Add && matches!(&value.kind, ExprKind::Constant(Constant::Number(n)) if n == "1") {
                    f.count_accumulation = true;
                }
            }
            StmtKind::Assign { value, .. } => f.has_transform_call |= contains_call(value),
            _ => {}
        });
    }
    f.appends_inner_items &= fragment.depth >= 2;

    match model::analyze(fragment) {
        Ok(Shape::Join(j)) => {
            f.key_match_join = true;
            f.join_is_canonical = is_canonical_join(fragment, &j);
            f.stages = vec![StageKind::Flatten, StageKind::Condition, StageKind::Append];
        }
        Ok(Shape::Linear(m)) => {
            for stage in &m.stages {
                f.stages.push(match stage {
                    Stage::Flatten { .. } => StageKind::Flatten,
                    Stage::Filter { .. } => StageKind::Condition,
                    Stage::Distinct { .. } => {
                        f.membership_guard = true;
                        StageKind::MembershipGuard
                    }
                    Stage::Bind { .. } => {
                        f.has_transform = true;
                        StageKind::Transform
                    }
                });
            }
            // Only the sink whose result survives the loop matters.
            let sink = m
                .sinks
                .iter()
                .find(|s| fragment.context.is_live(s.target()))
                .or(m.sinks.first());
            if let Some(sink) = sink {
                match sink {
                    Sink::Append { target, value } => {
                        if value.as_name() != Some(m.sink_var.as_str()) {
                            f.has_transform = true;
                            f.stages.push(StageKind::Transform);
                        }
                        f.stages.push(StageKind::Append);
                        f.neutral_init = fragment.context.init_of(target) == InitState::EmptyList;
                    }
                    Sink::Accumulate { target, op, value } => {
                        let init = fragment.context.init_of(target);
                        if sink.is_counter() {
                            f.stages.push(StageKind::Count);
                            f.neutral_init = init.is_numeric_zero();
                        } else {
                            if value.as_name() != Some(m.sink_var.as_str()) {
                                f.has_transform = true;
                                f.stages.push(StageKind::Transform);
                            }
                            f.stages.push(StageKind::Accumulate);
                            f.neutral_init = is_neutral(*op, init);
                        }
                    }
                    Sink::Group { .. } => {
                        f.group_pattern = true;
                        f.stages.push(StageKind::Group);
                    }
                }
            }
        }
        Err(_) => {}
    }
    f
}

fn contains_call(e: &Expr) -> bool {
    let mut found = false;
    e.walk(&mut |x| found |= matches!(x.kind, ExprKind::Call { .. }));
    found
}

/// Whether `init` is a neutral element of `op`, so that a seedless fold
/// reproduces the loop.
pub fn is_neutral(op: BinOp, init: InitState) -> bool {
    match op {
        BinOp::Add => matches!(
            init,
            InitState::Zero | InitState::ZeroFloat | InitState::EmptyStr | InitState::EmptyList
        ),
        BinOp::Mult => init == InitState::One,
        _ => false,
    }
}

fn normalized(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Keys on the first component and the value is `(k, (a_value, b_value))`,
/// the pair-join shape of the target API.
pub fn is_canonical_join(fragment: &LoopFragment, j: &model::JoinModel) -> bool {
    let (a, b) = (&j.left_var, &j.right_var);
    normalized(fragment.text(j.left_key.span)) == format!("{a}[0]")
        && normalized(fragment.text(j.right_key.span)) == format!("{b}[0]")
        && [format!("({a}[0],({a}[1],{b}[1]))"), format!("({b}[0],({a}[1],{b}[1]))")]
            .contains(&normalized(fragment.text(j.value.span)))
}
