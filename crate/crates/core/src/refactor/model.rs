//! Structural reading of a loop body as a dataflow pipeline.
//!
//! A translatable loop body is a sequence of *stages* that transform the
//! current element (flatten, filter, de-duplicate, bind a new value) ending
//! in one or more *sinks* that deliver it (append, accumulate, group).

use crate::frontend::ast::*;
use crate::frontend::LoopFragment;

#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    /// `for inner in iterable:` where `iterable` depends on `param`.
    Flatten { param: String, iterable: Expr, inner: String },
    Filter { param: String, cond: Expr },
    /// `if elem not in seen: seen.add(elem)`.
    Distinct { elem: String, seen: String },
    /// `target = expr`.
    Bind { param: String, target: String, expr: Expr },
}

impl Stage {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Stage::Flatten { .. } => "flatten",
            Stage::Filter { .. } => "filter",
            Stage::Distinct { .. } => "distinct",
            Stage::Bind { .. } => "bind",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sink {
    Append { target: String, value: Expr },
    Accumulate { target: String, op: BinOp, value: Expr },
    /// `target.setdefault(key, []).append(value)`.
    Group { target: String, key: Expr, value: Expr },
}

impl Sink {
    pub fn target(&self) -> &str {
        match self {
            Sink::Append { target, .. } | Sink::Accumulate { target, .. } | Sink::Group { target, .. } => target,
        }
    }

    /// Accumulation of the constant `1` with `+`.
    pub fn is_counter(&self) -> bool {
        matches!(self, Sink::Accumulate { op: BinOp::Add, value, .. }
            if matches!(&value.kind, ExprKind::Constant(Constant::Number(n)) if n == "1"))
    }
}

/// A single-source pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopModel {
    pub source: String,
    pub var: String,
    pub stages: Vec<Stage>,
    pub sinks: Vec<Sink>,
    /// Element variable in scope at the sinks.
    pub sink_var: String,
}

/// `for a in left: for b in right: if ka == kb: target.append(value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinModel {
    pub left: String,
    pub left_var: String,
    pub right: String,
    pub right_var: String,
    pub left_key: Expr,
    pub right_key: Expr,
    pub target: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Linear(LoopModel),
    Join(JoinModel),
}

pub fn analyze(fragment: &LoopFragment) -> Result<Shape, String> {
    let StmtKind::For { target, iter, body, .. } = &fragment.stmt.kind else {
        return Err("not a for loop".into());
    };
    let var = target.as_name().ok_or("loop target is not a plain name")?.to_string();
    let source = iter.as_name().ok_or("iterable is not a plain name")?.to_string();
    if let Some(join) = analyze_join(fragment, &source, &var, body) {
        return Ok(Shape::Join(join));
    }
    let mut model = LoopModel {
        source,
        var: var.clone(),
        stages: Vec::new(),
        sinks: Vec::new(),
        sink_var: var.clone(),
    };
    let mut cur = var;
    walk_block(fragment, body, &mut cur, &mut model)?;
    model.sink_var = cur;
    if model.sinks.is_empty() {
        return Err("loop body has no append or accumulation".into());
    }
    let mut targets: Vec<&str> = Vec::new();
    for sink in &model.sinks {
        if targets.contains(&sink.target()) {
            return Err(format!("`{}` is written more than once per iteration", sink.target()));
        }
        targets.push(sink.target());
    }
    Ok(Shape::Linear(model))
}

fn significant(stmts: &[Stmt]) -> Vec<&Stmt> {
    stmts.iter().filter(|s| !matches!(s.kind, StmtKind::Pass)).collect()
}

fn walk_block(fragment: &LoopFragment, stmts: &[Stmt], cur: &mut String, model: &mut LoopModel) -> Result<(), String> {
    let stmts = significant(stmts);
    let last = stmts.len().saturating_sub(1);
    for (i, stmt) in stmts.iter().enumerate() {
        if let Some(sink) = as_sink(stmt) {
            model.sinks.push(sink);
            continue;
        }
        if !model.sinks.is_empty() {
            return Err(format!("statement on line {} follows an append or accumulation", stmt.span.line));
        }
        match &stmt.kind {
            StmtKind::Assign { targets, value } if targets.len() == 1 => {
                let t = targets[0]
                    .as_name()
                    .ok_or_else(|| format!("assignment on line {} has a complex target", stmt.span.line))?;
                if value.mentions(t) {
                    return Err(format!("`{t}` depends on its previous value"));
                }
                model.stages.push(Stage::Bind {
                    param: cur.clone(),
                    target: t.to_string(),
                    expr: value.clone(),
                });
                *cur = t.to_string();
            }
            StmtKind::If { test, body, orelse, .. } => {
                if !orelse.is_empty() {
                    return Err(format!("conditional on line {} has an else branch", stmt.span.line));
                }
                if i != last {
                    return Err(format!("conditional on line {} is followed by more statements", stmt.span.line));
                }
                if let Some((seen, rest)) = distinct_guard(fragment, test, body, cur) {
                    model.stages.push(Stage::Distinct {
                        elem: cur.clone(),
                        seen,
                    });
                    if rest.is_empty() {
                        // The marker list is the result itself.
                        if let Some(sink @ Sink::Append { .. }) = significant(body).first().and_then(|s| as_sink(s)) {
                            model.sinks.push(sink);
                        }
                    } else {
                        let rest: Vec<Stmt> = rest.into_iter().cloned().collect();
                        walk_block(fragment, &rest, cur, model)?;
                    }
                } else {
                    model.stages.push(Stage::Filter {
                        param: cur.clone(),
                        cond: test.clone(),
                    });
                    walk_block(fragment, body, cur, model)?;
                }
            }
            StmtKind::For {
                target,
                iter,
                body,
                orelse,
            } => {
                if !orelse.is_empty() || i != last {
                    return Err(format!("inner loop on line {} is not the last statement", stmt.span.line));
                }
                let inner = target.as_name().ok_or("inner loop target is not a plain name")?;
                if !iter.mentions(cur) {
                    return Err(format!("inner loop on line {} does not iterate over the current element", stmt.span.line));
                }
                model.stages.push(Stage::Flatten {
                    param: cur.clone(),
                    iterable: iter.clone(),
                    inner: inner.to_string(),
                });
                *cur = inner.to_string();
                walk_block(fragment, body, cur, model)?;
            }
            _ => return Err(format!("unsupported statement on line {}", stmt.span.line)),
        }
    }
    Ok(())
}

fn as_sink(stmt: &Stmt) -> Option<Sink> {
    match &stmt.kind {
        StmtKind::Expr(e) => {
            let (recv, method, args, keywords) = e.as_method_call()?;
            if method != "append" || args.len() != 1 || !keywords.is_empty() {
                return None;
            }
            if let Some(target) = recv.as_name() {
                return Some(Sink::Append {
                    target: target.to_string(),
                    value: args[0].clone(),
                });
            }
            // groups.setdefault(key, []).append(value)
            let (inner_recv, inner_method, inner_args, _) = recv.as_method_call()?;
            let target = inner_recv.as_name()?;
            let empty_list = matches!(inner_args.get(1).map(|a| &a.kind), Some(ExprKind::List(items)) if items.is_empty());
            if inner_method == "setdefault" && inner_args.len() == 2 && empty_list {
                return Some(Sink::Group {
                    target: target.to_string(),
                    key: inner_args[0].clone(),
                    value: args[0].clone(),
                });
            }
            None
        }
        StmtKind::AugAssign { target, op, value } => {
            let t = target.as_name()?;
            if value.mentions(t) {
                return None;
            }
            Some(Sink::Accumulate {
                target: t.to_string(),
                op: *op,
                value: value.clone(),
            })
        }
        _ => None,
    }
}

/// `if cur not in seen:` whose body starts with `seen.add(cur)` or
/// `seen.append(cur)`; returns the set name and the remaining body.
fn distinct_guard<'a>(fragment: &LoopFragment, test: &Expr, body: &'a [Stmt], cur: &str) -> Option<(String, Vec<&'a Stmt>)> {
    let ExprKind::Compare { left, ops, comparators } = &test.kind else {
        return None;
    };
    if ops.as_slice() != [CmpOp::NotIn] || left.as_name() != Some(cur) {
        return None;
    }
    let seen = comparators[0].as_name()?;
    if !fragment.output_datasets.iter().any(|o| o == seen) {
        return None;
    }
    let body = significant(body);
    let (first, rest) = body.split_first()?;
    let StmtKind::Expr(call) = &first.kind else {
        return None;
    };
    let (recv, method, args, _) = call.as_method_call()?;
    if recv.as_name() != Some(seen) || !matches!(method, "add" | "append") || args.len() != 1 || args[0].as_name() != Some(cur) {
        return None;
    }
    // The marker set must not be touched anywhere else in the rest of the body.
    if rest.iter().any(|s| {
        let mut touched = false;
        for e in s.own_exprs() {
            touched |= e.mentions(seen);
        }
        s.walk(&mut |inner| {
            for e in inner.own_exprs() {
                touched |= e.mentions(seen);
            }
        });
        touched
    }) {
        return None;
    }
    Some((seen.to_string(), rest.to_vec()))
}

fn analyze_join(fragment: &LoopFragment, left: &str, left_var: &str, body: &[Stmt]) -> Option<JoinModel> {
    let body = significant(body);
    let [inner] = body.as_slice() else { return None };
    let StmtKind::For {
        target,
        iter,
        body: inner_body,
        orelse,
    } = &inner.kind
    else {
        return None;
    };
    let right_var = target.as_name()?;
    let right = iter.as_name()?;
    if !orelse.is_empty() || right == left_var || right == left || !fragment.input_datasets.iter().any(|d| d == right) {
        return None;
    }
    let inner_body = significant(inner_body);
    let [cond_stmt] = inner_body.as_slice() else { return None };
    let StmtKind::If {
        test,
        body: if_body,
        orelse,
        ..
    } = &cond_stmt.kind
    else {
        return None;
    };
    if !orelse.is_empty() {
        return None;
    }
    let ExprKind::Compare { left: lhs, ops, comparators } = &test.kind else {
        return None;
    };
    if ops.as_slice() != [CmpOp::Eq] {
        return None;
    }
    let rhs = &comparators[0];
    let only = |e: &Expr, var: &str, other: &str| e.mentions(var) && !e.mentions(other);
    let (left_key, right_key) = if only(lhs, left_var, right_var) && only(rhs, right_var, left_var) {
        ((**lhs).clone(), rhs.clone())
    } else if only(rhs, left_var, right_var) && only(lhs, right_var, left_var) {
        (rhs.clone(), (**lhs).clone())
    } else {
        return None;
    };
    let if_body = significant(if_body);
    let [append] = if_body.as_slice() else { return None };
    let Some(Sink::Append { target, value }) = as_sink(append) else {
        return None;
    };
    Some(JoinModel {
        left: left.to_string(),
        left_var: left_var.to_string(),
        right: right.to_string(),
        right_var: right_var.to_string(),
        left_key,
        right_key,
        target,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{extract_fragments, SourceProgram};

    fn shape(src: &str) -> Result<Shape, String> {
        let p = SourceProgram::from_source("t.py", src).unwrap();
        analyze(&extract_fragments(&p)[0])
    }

    #[test]
    fn filter_then_append() {
        let Shape::Linear(m) = shape("def f(numbers):\n    evens = []\n    for num in numbers:\n        if num % 2 == 0:\n            evens.append(num)\n    return evens\n").unwrap() else { panic!() };
        assert_eq!(m.stages.len(), 1);
        assert!(matches!(&m.stages[0], Stage::Filter { param, .. } if param == "num"));
        assert!(matches!(&m.sinks[0], Sink::Append { target, .. } if target == "evens"));
    }

    #[test]
    fn flatten_distinct_count() {
        let src = "def f(docs):\n    seen = set()\n    n = 0\n    for doc in docs:\n        for w in doc.split():\n            if w not in seen:\n                seen.add(w)\n                n += 1\n    return n\n";
        let Shape::Linear(m) = shape(src).unwrap() else { panic!() };
        let kinds: Vec<_> = m.stages.iter().map(Stage::kind_name).collect();
        assert_eq!(kinds, ["flatten", "distinct"]);
        assert!(m.sinks[0].is_counter());
        assert_eq!(m.sink_var, "w");
    }

    #[test]
    fn join_shape() {
        let src = "def j(orders, customers):\n    out = []\n    for o in orders:\n        for c in customers:\n            if o[0] == c[0]:\n                out.append((o[0], (o[1], c[1])))\n    return out\n";
        let Shape::Join(j) = shape(src).unwrap() else { panic!() };
        assert_eq!((j.left.as_str(), j.right.as_str(), j.target.as_str()), ("orders", "customers", "out"));
    }

    #[test]
    fn rejects_else_and_trailing_statements() {
        assert!(shape("for x in xs:\n    if x:\n        a.append(x)\n    else:\n        b.append(x)\n").is_err());
        assert!(shape("for x in xs:\n    a.append(x)\n    y = x\n").is_err());
        assert!(shape("for x in xs:\n    print(x)\n").is_err());
    }

    #[test]
    fn group_sink() {
        let Shape::Linear(m) = shape("for w in words:\n    groups.setdefault(len(w), []).append(w)\n").unwrap() else { panic!() };
        assert!(matches!(&m.sinks[0], Sink::Group { target, .. } if target == "groups"));
    }
}
