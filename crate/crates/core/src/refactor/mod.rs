//! Rewrites a fragment into a chain of lambda-wrapped dataset operations.

pub mod model;

use serde::Serialize;
use thiserror::Error;

use crate::frontend::ast::*;
use crate::frontend::parser::{parse_expression, parse_module};
use crate::frontend::{InitState, LoopFragment, OperationKind, OperationRecord};
use crate::predictor::features::{is_canonical_join, is_neutral};
use crate::predictor::{BaseOp, CandidateChain};
use model::{JoinModel, LoopModel, Shape, Sink, Stage};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefactoredSnippet {
    /// One statement, without indentation.
    pub text: String,
    /// Suffixed name of the dataset the chain starts from, e.g. `numbers_rdd`.
    pub primary_dataset: String,
    pub secondary_dataset: Option<String>,
    pub result_var: String,
    pub requires_collect: bool,
    pub chain: CandidateChain,
}

impl RefactoredSnippet {
    /// Plain names of the datasets the snippet reads, primary first.
    pub fn datasets(&self) -> Vec<String> {
        std::iter::once(&self.primary_dataset)
            .chain(self.secondary_dataset.as_ref())
            .map(|d| d.strip_suffix(RDD_SUFFIX).unwrap_or(d).to_string())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefactorError {
    #[error("unrefactorable: {0}")]
    Unrefactorable(String),
}

type Result<T> = std::result::Result<T, RefactorError>;

fn fail<T>(reason: impl Into<String>) -> Result<T> {
    Err(RefactorError::Unrefactorable(reason.into()))
}

pub const RDD_SUFFIX: &str = "_rdd";

pub fn rdd_name(dataset: &str) -> String {
    format!("{dataset}{RDD_SUFFIX}")
}

/// Instantiates `chain` on the fragment.
pub fn refactor(fragment: &LoopFragment, chain: &CandidateChain) -> Result<RefactoredSnippet> {
    if let Some(reason) = &fragment.untranslatable {
        return fail(reason.clone());
    }
    if chain.ops.is_empty() {
        return fail("empty chain");
    }
    if chain.ops.contains(&BaseOp::Take) {
        return fail("take has no loop equivalent");
    }
    let shape = model::analyze(fragment).map_err(RefactorError::Unrefactorable)?;
    for name in &fragment.bound {
        if fragment.context.is_live(name) {
            return fail(format!("`{name}` is used after the loop"));
        }
    }
    let b = Builder { fragment };
    match (&shape, chain.ops[0]) {
        (Shape::Join(j), BaseOp::Join) => b.join(j, chain),
        (_, BaseOp::Join) => fail("join needs two datasets matched on a key"),
        (Shape::Linear(m), BaseOp::Union) => b.union(m, chain),
        (_, BaseOp::Union) => fail("union needs an output extended by a second dataset"),
        (Shape::Join(_), _) => fail("nested loop over two datasets needs a join"),
        (Shape::Linear(m), _) => b.linear(m, chain),
    }
}

struct Builder<'f> {
    fragment: &'f LoopFragment,
}

impl<'f> Builder<'f> {
    fn text(&self, e: &Expr) -> &'f str {
        // Spans index into the shared program text.
        let f: &'f LoopFragment = self.fragment;
        f.text(e.span)
    }

    /// `lambda <params>: <body>`, refusing bodies that read loop-local names
    /// other than the parameters, the outputs, or the input datasets.
    fn lambda(&self, params: &[&str], body: &Expr) -> Result<String> {
        check_scope(self.fragment, params, body)?;
        Ok(format!("lambda {}: {}", params.join(", "), self.text(body)))
    }

    fn linear(&self, m: &LoopModel, chain: &CandidateChain) -> Result<RefactoredSnippet> {
        let f = self.fragment;
        let live: Vec<&Sink> = m.sinks.iter().filter(|s| f.context.is_live(s.target())).collect();
        let sink = match live.as_slice() {
            [] => &m.sinks[0],
            [one] => *one,
            _ => return fail("more than one result is used after the loop"),
        };
        for stage in &m.stages {
            if let Stage::Distinct { seen, .. } = stage {
                if !matches!(f.context.init_of(seen), InitState::EmptyList | InitState::EmptySet) {
                    return fail(format!("`{seen}` is not empty before the loop"));
                }
                if f.context.is_live(seen) && seen != sink.target() {
                    return fail(format!("`{seen}` is used after the loop"));
                }
            }
        }

        let mut calls: Vec<String> = Vec::new();
        let mut idx = 0;
        let mut cur = m.var.clone();
        let mut value_done = false;
        let ops = &chain.ops;
        for (i, op) in ops.iter().enumerate() {
            let stage = m.stages.get(idx);
            match op {
                BaseOp::FlatMap => {
                    let Some(Stage::Flatten { param, iterable, inner }) = stage else {
                        return fail(self.mismatch(*op, stage));
                    };
                    let lam = if iterable.as_name() == Some(param.as_str()) {
                        "lambda x: x".to_string()
                    } else {
                        self.lambda(&[param], iterable)?
                    };
                    calls.push(format!("flatMap({lam})"));
                    cur = inner.clone();
                    idx += 1;
                }
                BaseOp::Filter => {
                    let Some(Stage::Filter { param, cond }) = stage else {
                        return fail(self.mismatch(*op, stage));
                    };
                    calls.push(format!("filter({})", self.lambda(&[param], cond)?));
                    idx += 1;
                }
                BaseOp::Distinct => {
                    let Some(Stage::Distinct { elem, .. }) = stage else {
                        return fail(self.mismatch(*op, stage));
                    };
                    if *elem != cur {
                        return fail("de-duplicated value is not the current element");
                    }
                    calls.push("distinct()".into());
                    idx += 1;
                }
                BaseOp::Map => match stage {
                    Some(Stage::Bind { param, target, expr }) => {
                        calls.push(format!("map({})", self.lambda(&[param], expr)?));
                        cur = target.clone();
                        idx += 1;
                    }
                    Some(other) => return fail(self.mismatch(*op, Some(other))),
                    None if !value_done => {
                        let body = match sink {
                            Sink::Append { value, .. } => self.lambda(&[&cur], value)?,
                            Sink::Accumulate { value, .. } if !sink.is_counter() => self.lambda(&[&cur], value)?,
                            Sink::Accumulate { .. } => format!("lambda {cur}: {cur}"),
                            Sink::Group { key, value, .. } => {
                                check_scope(f, &[&cur], key)?;
                                check_scope(f, &[&cur], value)?;
                                format!("lambda {cur}: ({}, {})", self.text(key), self.text(value))
                            }
                        };
                        calls.push(format!("map({body})"));
                        value_done = true;
                    }
                    None => return fail("map has nothing left to transform"),
                },
                BaseOp::SortBy => {
                    if stage.is_some() {
                        return fail(self.mismatch(*op, stage));
                    }
                    if !matches!(sink, Sink::Append { .. }) {
                        return fail("sortBy needs a list result");
                    }
                    calls.push(sort_call(f, &cur, sink.target()));
                }
                BaseOp::GroupByKey => {
                    if stage.is_some() {
                        return fail(self.mismatch(*op, stage));
                    }
                    if !matches!(sink, Sink::Group { .. }) || !value_done {
                        return fail("groupByKey needs key-value pairs from a grouping loop");
                    }
                    calls.push("groupByKey()".into());
                }
                BaseOp::Reduce | BaseOp::Sum | BaseOp::Count | BaseOp::Collect => {
                    debug_assert_eq!(i + 1, ops.len());
                    if let Some(stage) = stage {
                        return fail(self.uncovered(stage));
                    }
                    calls.push(self.terminal(*op, sink, &cur, value_done)?);
                }
                BaseOp::Take | BaseOp::Join | BaseOp::Union => return fail(format!("{op} cannot appear here")),
            }
        }
        if let Some(stage) = m.stages.get(idx) {
            return fail(self.uncovered(stage));
        }

        let last = *ops.last().expect("non-empty chain");
        let target = sink.target().to_string();
        let init = f.context.init_of(&target);
        let mut requires_collect = false;
        let text = match sink {
            Sink::Append { value, .. } => {
                if last.is_aggregator() {
                    return fail(format!("{last} yields a single value but `{target}` is a list"));
                }
                if !value_done && value.as_name() != Some(cur.as_str()) {
                    return fail(format!("appended value `{}` is not produced by the chain", self.text(value)));
                }
                if init != InitState::EmptyList {
                    return fail(format!("`{target}` is not an empty list before the loop"));
                }
                requires_collect = f.context.is_live(&target) && last != BaseOp::Collect;
                let mut expr = format!("{}.{}", rdd_name(&m.source), calls.join("."));
                if requires_collect {
                    expr.push_str(".collect()");
                }
                format!("{target} = {expr}")
            }
            Sink::Accumulate { .. } => {
                if !last.is_aggregator() {
                    return fail(format!("`{target}` accumulates a single value; the chain must end in reduce, sum or count"));
                }
                format!("{target} = {}.{}", rdd_name(&m.source), calls.join("."))
            }
            Sink::Group { .. } => {
                if last != BaseOp::GroupByKey {
                    return fail("grouping loop needs a chain ending in groupByKey");
                }
                if init != InitState::EmptyDict {
                    return fail(format!("`{target}` is not an empty dict before the loop"));
                }
                requires_collect = true;
                format!(
                    "{target} = {{k: list(v) for k, v in {}.{}.collect()}}",
                    rdd_name(&m.source),
                    calls.join(".")
                )
            }
        };
        Ok(RefactoredSnippet {
            text,
            primary_dataset: rdd_name(&m.source),
            secondary_dataset: None,
            result_var: target,
            requires_collect,
            chain: chain.clone(),
        })
    }

    fn terminal(&self, op: BaseOp, sink: &Sink, cur: &str, value_done: bool) -> Result<String> {
        let f = self.fragment;
        let target = sink.target();
        let init = f.context.init_of(target);
        match (op, sink) {
            (BaseOp::Collect, Sink::Append { .. }) => Ok("collect()".into()),
            (BaseOp::Collect, _) => fail("collect needs a list result"),
            (BaseOp::Count, s) if s.is_counter() => {
                if init != InitState::Zero {
                    return fail(format!("`{target}` does not start at 0"));
                }
                Ok("count()".into())
            }
            (BaseOp::Count, _) => fail("count needs a `+= 1` counter"),
            (BaseOp::Reduce | BaseOp::Sum, Sink::Accumulate { op: bin, value, .. }) => {
                if !value_done && value.as_name() != Some(cur) {
                    return fail(format!("accumulated value `{}` is not produced by the chain", self.text(value)));
                }
                if op == BaseOp::Sum {
                    if *bin != BinOp::Add || !init.is_numeric_zero() {
                        return fail(format!("sum needs `{target} += ...` starting from zero"));
                    }
                    return Ok("sum()".into());
                }
                if !is_neutral(*bin, init) {
                    return fail(format!("`{target}` does not start at the neutral element of `{}`", bin.symbol()));
                }
                build_reduce(*bin)
            }
            (_, _) => fail(format!("{op} needs an accumulation")),
        }
    }

    fn mismatch(&self, op: BaseOp, stage: Option<&Stage>) -> String {
        match stage {
            Some(s) => format!("{op} cannot implement the {} step", s.kind_name()),
            None => format!("no step left for {op}"),
        }
    }

    fn uncovered(&self, stage: &Stage) -> String {
        format!("chain does not cover the {} step", stage.kind_name())
    }

    fn union(&self, m: &LoopModel, chain: &CandidateChain) -> Result<RefactoredSnippet> {
        let f = self.fragment;
        if !matches!(chain.ops.as_slice(), [BaseOp::Union] | [BaseOp::Union, BaseOp::Collect]) {
            return fail("union is only followed by collect");
        }
        let [Sink::Append { target, value }] = m.sinks.as_slice() else {
            return fail("union needs a single append");
        };
        if !m.stages.is_empty() || value.as_name() != Some(m.var.as_str()) {
            return fail("union needs every element appended unchanged");
        }
        if f.context.init_of(target) != InitState::Modified {
            return fail(format!("`{target}` holds no earlier data to extend"));
        }
        let requires_collect = f.context.is_live(target) || chain.ops.len() == 2;
        let mut text = format!("{target} = {}", build_binary_op(BaseOp::Union, target, Some(&m.source))?);
        if requires_collect {
            text.push_str(".collect()");
        }
        Ok(RefactoredSnippet {
            text,
            primary_dataset: rdd_name(target),
            secondary_dataset: Some(rdd_name(&m.source)),
            result_var: target.clone(),
            requires_collect,
            chain: chain.clone(),
        })
    }

    fn join(&self, j: &JoinModel, chain: &CandidateChain) -> Result<RefactoredSnippet> {
        let f = self.fragment;
        if f.context.init_of(&j.target) != InitState::EmptyList {
            return fail(format!("`{}` is not an empty list before the loop", j.target));
        }
        let canonical = is_canonical_join(f, j);
        let (a, b) = (j.left_var.as_str(), j.right_var.as_str());
        let expr = match chain.ops.as_slice() {
            [BaseOp::Join] | [BaseOp::Join, BaseOp::Collect] if canonical => {
                build_binary_op(BaseOp::Join, &j.left, Some(&j.right))?
            }
            [BaseOp::Join] | [BaseOp::Join, BaseOp::Collect] => {
                return fail("joined pairs do not match the appended value; a map is needed")
            }
            [BaseOp::Join, BaseOp::Map] => {
                let left = format!("{}.map({})", rdd_name(&j.left), self.keyed(a, &j.left_key)?);
                let right = format!("{}.map({})", rdd_name(&j.right), self.keyed(b, &j.right_key)?);
                check_scope(f, &[a, b], &j.value)?;
                format!(
                    "{left}.join({right}).map(lambda kv: (lambda {a}, {b}: {})(kv[1][0], kv[1][1]))",
                    self.text(&j.value)
                )
            }
            _ => return fail("join is only followed by map or collect"),
        };
        let requires_collect = f.context.is_live(&j.target) || chain.ops.last() == Some(&BaseOp::Collect);
        let text = if requires_collect {
            format!("{} = {expr}.collect()", j.target)
        } else {
            format!("{} = {expr}", j.target)
        };
        Ok(RefactoredSnippet {
            text,
            primary_dataset: rdd_name(&j.left),
            secondary_dataset: Some(rdd_name(&j.right)),
            result_var: j.target.clone(),
            requires_collect,
            chain: chain.clone(),
        })
    }

    fn keyed(&self, var: &str, key: &Expr) -> Result<String> {
        check_scope(self.fragment, &[var], key)?;
        Ok(format!("lambda {var}: ({}, {var})", self.text(key)))
    }
}

fn sort_call(f: &LoopFragment, cur: &str, target: &str) -> String {
    match f.context.sort_of(target) {
        Some(spec) => {
            let key = spec.key.clone().unwrap_or_else(|| format!("lambda {cur}: {cur}"));
            if spec.reverse {
                format!("sortBy({key}, ascending=False)")
            } else {
                format!("sortBy({key})")
            }
        }
        None => format!("sortBy(lambda {cur}: {cur})"),
    }
}

fn check_scope(f: &LoopFragment, params: &[&str], body: &Expr) -> Result<()> {
    for name in body.free_names() {
        if params.contains(&name.as_str()) {
            continue;
        }
        if f.bound.contains(&name) {
            return fail(format!("`{name}` is not in scope inside the lambda"));
        }
        if f.output_datasets.contains(&name) {
            return fail(format!("lambda reads `{name}`, which the loop is building"));
        }
        if f.input_datasets.contains(&name) {
            return fail(format!("lambda reads the dataset `{name}` itself"));
        }
    }
    Ok(())
}

fn build_reduce(op: BinOp) -> Result<String> {
    match op {
        BinOp::Add | BinOp::Mult | BinOp::BitOr | BinOp::BitAnd | BinOp::BitXor => {
            Ok(format!("reduce(lambda a, b: a {} b)", op.symbol()))
        }
        other => fail(format!("`{}=` is not associative", other.symbol())),
    }
}

const MUTATING_METHODS: &[&str] = &[
    "append", "extend", "add", "insert", "pop", "remove", "clear", "update", "setdefault", "sort", "reverse", "discard",
];

fn parse_op_expr(op: &OperationRecord) -> Result<Expr> {
    parse_expression(&op.expression).map_err(|e| RefactorError::Unrefactorable(format!("cannot parse `{}`: {}", op.expression, e.message)))
}

fn local_check(names: &[String], loop_var: &str, locals: &[String]) -> Result<()> {
    match names.iter().find(|n| *n != loop_var && locals.contains(n)) {
        Some(n) => fail(format!("`{n}` is not in scope inside the lambda")),
        None => Ok(()),
    }
}

/// `lambda <loop_var>: <condition>` from a conditional operation. `locals`
/// are the names bound inside the loop.
pub fn build_predicate_lambda(op: &OperationRecord, loop_var: &str, locals: &[String]) -> Result<String> {
    if op.kind != OperationKind::Conditional {
        return fail("not a conditional");
    }
    let expr = parse_op_expr(op)?;
    local_check(&expr.free_names(), loop_var, locals)?;
    Ok(format!("lambda {loop_var}: {}", op.expression.trim()))
}

/// `lambda <loop_var>: <value>` from an assignment, append or accumulation.
pub fn build_transform_lambda(op: &OperationRecord, loop_var: &str, locals: &[String]) -> Result<String> {
    let module = parse_module(&op.expression)
        .map_err(|e| RefactorError::Unrefactorable(format!("cannot parse `{}`: {}", op.expression, e.message)))?;
    let [stmt] = module.body.as_slice() else {
        return fail("expected a single statement");
    };
    let value = match (&op.kind, &stmt.kind) {
        (OperationKind::Assign, StmtKind::Assign { value, .. }) => value,
        (OperationKind::AugmentedAssign, StmtKind::AugAssign { value, .. }) => value,
        (OperationKind::MethodCall, StmtKind::Expr(e)) => match e.as_method_call() {
            Some((_, "append", [arg], [])) => arg,
            _ => return fail("only `.append(value)` calls carry a transform"),
        },
        _ => return fail("operation carries no transform"),
    };
    let mut mutates = false;
    value.walk(&mut |e| {
        if let Some((_, method, ..)) = e.as_method_call() {
            mutates |= MUTATING_METHODS.contains(&method);
        }
    });
    if mutates {
        return fail("transform mutates state");
    }
    local_check(&value.free_names(), loop_var, locals)?;
    Ok(format!("lambda {loop_var}: {}", &op.expression[value.span.start..value.span.end]))
}

/// The aggregation call for `op` on the fragment's accumulation.
pub fn build_aggregator(op: BaseOp, fragment: &LoopFragment) -> Result<String> {
    match op {
        BaseOp::Sum => Ok("sum()".into()),
        BaseOp::Count => Ok("count()".into()),
        BaseOp::Reduce => {
            let Ok(Shape::Linear(m)) = model::analyze(fragment) else {
                return fail("no accumulation to reduce");
            };
            match m.sinks.iter().find_map(|s| match s {
                Sink::Accumulate { op, .. } => Some(*op),
                _ => None,
            }) {
                Some(bin) => build_reduce(bin),
                None => fail("no binary accumulation operator"),
            }
        }
        other => fail(format!("{other} is not an aggregator")),
    }
}

/// `<primary>_rdd.<op>(<secondary>_rdd)` for join and union.
pub fn build_binary_op(op: BaseOp, primary: &str, secondary: Option<&str>) -> Result<String> {
    if !op.is_binary() {
        return fail(format!("{op} is not a binary operation"));
    }
    let Some(secondary) = secondary else {
        return fail(format!("{op} needs a second dataset"));
    };
    Ok(format!("{}.{}({})", rdd_name(primary), op.name(), rdd_name(secondary)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{extract_fragments, SourceProgram};
    use crate::predictor::Origin;
    use BaseOp::*;

    fn fragments(src: &str) -> Vec<LoopFragment> {
        extract_fragments(&SourceProgram::from_source("t.py", src).unwrap())
    }

    fn chain(ops: &[BaseOp]) -> CandidateChain {
        CandidateChain::new(ops.to_vec(), Origin::Heuristic)
    }

    fn text(src: &str, ops: &[BaseOp]) -> Result<String> {
        refactor(&fragments(src)[0], &chain(ops)).map(|s| s.text)
    }

    const EVEN: &str = "def even_filter(numbers):\n    evens = []\n    for num in numbers:\n        if num % 2 == 0:\n            evens.append(num)\n    return evens\n";
    const EVEN_SUM: &str = "def sum_even(numbers):\n    total = 0\n    for num in numbers:\n        if num % 2 == 0:\n            total += num\n    return total\n";

    #[test]
    fn filter_with_collect() {
        assert_eq!(
            text(EVEN, &[Filter]).unwrap(),
            "evens = numbers_rdd.filter(lambda num: num % 2 == 0).collect()"
        );
    }

    #[test]
    fn filter_reduce_and_sum() {
        assert_eq!(
            text(EVEN_SUM, &[Filter, Reduce]).unwrap(),
            "total = numbers_rdd.filter(lambda num: num % 2 == 0).reduce(lambda a, b: a + b)"
        );
        assert_eq!(text(EVEN_SUM, &[Filter, Sum]).unwrap(), "total = numbers_rdd.filter(lambda num: num % 2 == 0).sum()");
    }

    #[test]
    fn mismatches_are_unrefactorable() {
        for ops in [&[FlatMap, Count][..], &[Take], &[SortBy], &[Map, Distinct], &[Filter, Sum], &[Join], &[Reduce]] {
            assert!(text(EVEN, ops).is_err(), "{ops:?}");
        }
        assert!(text(EVEN_SUM, &[Filter, Count]).is_err());
        assert!(text(EVEN_SUM, &[Sum]).is_err(), "skipping the condition");
    }

    #[test]
    fn transform_accumulate() {
        let src = "def f(strings):\n    result = ''\n    for str in strings:\n        lower = str.lower()\n        result += lower\n    return result\n";
        assert_eq!(text(src, &[Map, Reduce]).unwrap(), "result = strings_rdd.map(lambda str: str.lower()).reduce(lambda a, b: a + b)");
        assert!(text(src, &[Map, Sum]).is_err(), "string accumulator is not numeric");
        assert!(text(src, &[Reduce]).is_err(), "bind step not covered");
    }

    #[test]
    fn non_neutral_init() {
        let src = "def f(xs):\n    total = 10\n    for x in xs:\n        total += x\n    return total\n";
        assert!(text(src, &[Reduce]).is_err());
        let src = "def f(xs):\n    p = 1\n    for x in xs:\n        p *= x\n    return p\n";
        assert_eq!(text(src, &[Reduce]).unwrap(), "p = xs_rdd.reduce(lambda a, b: a * b)");
    }

    #[test]
    fn flatten_identity() {
        let src = "def flatten(list_of_lists):\n    result = []\n    for sublist in list_of_lists:\n        for item in sublist:\n            result.append(item)\n    return result\n";
        assert_eq!(text(src, &[FlatMap]).unwrap(), "result = list_of_lists_rdd.flatMap(lambda x: x).collect()");
    }

    #[test]
    fn join_forms() {
        let src = "def j(orders, customers):\n    out = []\n    for o in orders:\n        for c in customers:\n            if o[0] == c[0]:\n                out.append((o[0], (o[1], c[1])))\n    return out\n";
        assert_eq!(text(src, &[Join]).unwrap(), "out = orders_rdd.join(customers_rdd).collect()");
        let keyed = "def j(xs, ys):\n    out = []\n    for a in xs:\n        for b in ys:\n            if a['id'] == b['ref']:\n                out.append(a['v'] + b['w'])\n    return out\n";
        assert!(text(keyed, &[Join]).is_err());
        assert_eq!(
            text(keyed, &[Join, Map]).unwrap(),
            "out = xs_rdd.map(lambda a: (a['id'], a)).join(ys_rdd.map(lambda b: (b['ref'], b))).map(lambda kv: (lambda a, b: a['v'] + b['w'])(kv[1][0], kv[1][1])).collect()"
        );
    }

    #[test]
    fn union_extends() {
        let src = "def merge(first, second):\n    combined = []\n    for x in first:\n        combined.append(x)\n    for y in second:\n        combined.append(y)\n    return combined\n";
        let f = fragments(src);
        assert_eq!(refactor(&f[0], &chain(&[Map])).unwrap().text, "combined = first_rdd.map(lambda x: x).collect()");
        assert!(refactor(&f[0], &chain(&[Union])).is_err());
        let s = refactor(&f[1], &chain(&[Union])).unwrap();
        assert_eq!(s.text, "combined = combined_rdd.union(second_rdd).collect()");
        assert_eq!(s.datasets(), vec!["combined", "second"]);
    }

    #[test]
    fn distinct_sort_and_count() {
        let src = "def f(tags):\n    unique = []\n    seen = set()\n    for t in tags:\n        if t not in seen:\n            seen.add(t)\n            unique.append(t)\n    unique.sort(reverse=True)\n    return unique\n";
        assert_eq!(
            text(src, &[Distinct, SortBy]).unwrap(),
            "unique = tags_rdd.distinct().sortBy(lambda t: t, ascending=False).collect()"
        );
        let src = "def f(docs):\n    seen = set()\n    n = 0\n    for doc in docs:\n        for w in doc.split():\n            if w not in seen:\n                seen.add(w)\n                n += 1\n    return n\n";
        assert_eq!(text(src, &[FlatMap, Distinct, Count]).unwrap(), "n = docs_rdd.flatMap(lambda doc: doc.split()).distinct().count()");
    }

    #[test]
    fn result_list_as_marker() {
        let src = "def f(tags):\n    unique = []\n    for t in tags:\n        if t not in unique:\n            unique.append(t)\n    return unique\n";
        assert_eq!(text(src, &[Distinct]).unwrap(), "unique = tags_rdd.distinct().collect()");
        assert!(text(src, &[Filter]).is_err());
        let src = "def f(tags, unique):\n    for t in tags:\n        if t not in unique:\n            unique.append(t)\n    return unique\n";
        assert!(text(src, &[Distinct]).is_err());
    }

    #[test]
    fn group_by_key() {
        let src = "def f(words):\n    groups = {}\n    for w in words:\n        groups.setdefault(len(w), []).append(w)\n    return groups\n";
        assert_eq!(
            text(src, &[Map, GroupByKey]).unwrap(),
            "groups = {k: list(v) for k, v in words_rdd.map(lambda w: (len(w), w)).groupByKey().collect()}"
        );
        assert!(text(src, &[GroupByKey]).is_err());
    }

    #[test]
    fn live_temporaries_block_translation() {
        let src = "def f(xs):\n    out = []\n    for x in xs:\n        out.append(x * 2)\n    return out, x\n";
        assert!(text(src, &[Map]).is_err());
    }

    #[test]
    fn dead_result_has_no_collect() {
        let src = "def even_filter(numbers):\n    evens = []\n    for num in numbers:\n        if num % 2 == 0:\n            evens.append(num)\n";
        let s = refactor(&fragments(src)[0], &chain(&[Filter])).unwrap();
        assert_eq!(s.text, "evens = numbers_rdd.filter(lambda num: num % 2 == 0)");
        assert!(!s.requires_collect);
    }

    #[test]
    fn lambda_builders() {
        let f = &fragments(EVEN)[0];
        assert_eq!(build_predicate_lambda(&f.operations[0], "num", &f.bound).unwrap(), "lambda num: num % 2 == 0");
        assert_eq!(build_transform_lambda(&f.operations[1], "num", &f.bound).unwrap(), "lambda num: num");
        assert!(build_predicate_lambda(&f.operations[1], "num", &f.bound).is_err());
        let op = OperationRecord {
            kind: OperationKind::Conditional,
            expression: "x > threshold".into(),
            variables: vec!["x".into(), "threshold".into()],
            line: 1,
        };
        assert_eq!(build_predicate_lambda(&op, "x", &["x".into()]).unwrap(), "lambda x: x > threshold");
        let op = OperationRecord {
            kind: OperationKind::Assign,
            expression: "lower = str.lower()".into(),
            variables: vec![],
            line: 1,
        };
        assert_eq!(build_transform_lambda(&op, "str", &["str".into(), "lower".into()]).unwrap(), "lambda str: str.lower()");
    }

    #[test]
    fn binary_builders() {
        assert_eq!(build_binary_op(Join, "orders", Some("customers")).unwrap(), "orders_rdd.join(customers_rdd)");
        assert_eq!(build_binary_op(Union, "a", Some("b")).unwrap(), "a_rdd.union(b_rdd)");
        assert!(build_binary_op(Join, "xs", None).is_err());
    }
}
