//! Loop fragment extraction.

use std::sync::Arc;

use serde::Serialize;

use super::ast::*;
use super::flow::{self, Frame, Owner};
pub use super::flow::{InitState, SortSpec};
use super::SourceProgram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LoopKind {
    For,
    While,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum OperationKind {
    Conditional,
    MethodCall,
    AugmentedAssign,
    Assign,
    FunctionCall,
}

impl OperationKind {
    /// The label used in extraction records.
    pub fn label(self) -> &'static str {
        match self {
            OperationKind::Conditional => "Conditional",
            OperationKind::MethodCall => "Method Call",
            OperationKind::AugmentedAssign => "Augmented Assignment",
            OperationKind::Assign => "Assignment",
            OperationKind::FunctionCall => "Function Call",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        [
            OperationKind::Conditional,
            OperationKind::MethodCall,
            OperationKind::AugmentedAssign,
            OperationKind::Assign,
            OperationKind::FunctionCall,
        ]
        .into_iter()
        .find(|k| k.label() == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OperationRecord {
    pub kind: OperationKind,
    /// Verbatim source text of the statement, or of the test for conditionals.
    pub expression: String,
    pub variables: Vec<String>,
    pub line: usize,
}

/// Facts about the code around a fragment.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FragmentContext {
    /// Name of the enclosing function, if any.
    pub function: Option<String>,
    /// How each relevant name was initialised before the loop.
    pub init: Vec<(String, InitState)>,
    /// Relevant names whose post-loop value can be observed.
    pub live_after: Vec<String>,
    /// Outputs sorted by the statement right after the loop.
    pub sorted_after: Vec<(String, SortSpec)>,
}

impl FragmentContext {
    pub fn init_of(&self, name: &str) -> InitState {
        self.init
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .unwrap_or(InitState::Unknown)
    }

    pub fn is_live(&self, name: &str) -> bool {
        self.live_after.iter().any(|n| n == name)
    }

    pub fn sort_of(&self, name: &str) -> Option<&SortSpec> {
        self.sorted_after.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopFragment {
    pub id: usize,
    pub start_line: usize,
    pub end_line: usize,
    pub is_nested: bool,
    pub parent_id: Option<usize>,
    pub loop_var: String,
    pub input_datasets: Vec<String>,
    pub output_datasets: Vec<String>,
    pub operations: Vec<OperationRecord>,
    pub kind: LoopKind,
    /// Why later stages must leave this fragment alone.
    pub untranslatable: Option<String>,
    /// Loop nesting depth inside the fragment, counting itself.
    pub depth: usize,
    /// Names bound anywhere inside the fragment (loop targets, assignments).
    pub bound: Vec<String>,
    pub context: FragmentContext,
    pub stmt: Stmt,
    /// The whole program text; spans in `stmt` index into it.
    pub source: Arc<str>,
}

impl LoopFragment {
    pub fn is_translatable(&self) -> bool {
        self.untranslatable.is_none()
    }

    pub fn body(&self) -> &[Stmt] {
        match &self.stmt.kind {
            StmtKind::For { body, .. } | StmtKind::While { body, .. } => body,
            _ => &[],
        }
    }

    /// Verbatim source text of a node inside this fragment.
    pub fn text(&self, span: Span) -> &str {
        &self.source[span.start..span.end]
    }

    pub fn iter_expr(&self) -> Option<&Expr> {
        match &self.stmt.kind {
            StmtKind::For { iter, .. } => Some(iter),
            _ => None,
        }
    }
}

/// One fragment per `for`/`while` statement, in source order.
pub fn extract_fragments(program: &SourceProgram) -> Vec<LoopFragment> {
    let mut ex = Extractor {
        program,
        source: Arc::from(program.text.as_str()),
        fragments: Vec::new(),
        loop_stack: Vec::new(),
        functions: Vec::new(),
    };
    let mut frames = Vec::new();
    ex.block(&program.module.body, Owner::Module, &mut frames);
    ex.fragments
}

struct Extractor<'p> {
    program: &'p SourceProgram,
    source: Arc<str>,
    fragments: Vec<LoopFragment>,
    loop_stack: Vec<usize>,
    functions: Vec<String>,
}

impl<'p> Extractor<'p> {
    fn block<'a>(&mut self, block: &'a [Stmt], owner: Owner<'a>, frames: &mut Vec<Frame<'a>>) {
        for (index, stmt) in block.iter().enumerate() {
            frames.push(Frame { block, index, owner });
            let pushed_loop = if stmt.kind.is_loop() {
                let id = self.fragment(stmt, frames);
                self.loop_stack.push(id);
                true
            } else {
                false
            };
            let inner_owner = match &stmt.kind {
                StmtKind::FunctionDef { name, .. } => {
                    self.functions.push(name.clone());
                    Owner::Function(stmt)
                }
                _ => Owner::Compound(stmt),
            };
            for child in stmt.blocks() {
                self.block(child, inner_owner, frames);
            }
            if matches!(stmt.kind, StmtKind::FunctionDef { .. }) {
                self.functions.pop();
            }
            if pushed_loop {
                self.loop_stack.pop();
            }
            frames.pop();
        }
    }

    fn fragment(&mut self, stmt: &Stmt, frames: &[Frame]) -> usize {
        let src = self.program.text.as_str();
        let id = self.fragments.len() + 1;
        let parent_id = self.loop_stack.last().copied();
        let (kind, loop_var) = match &stmt.kind {
            StmtKind::For { target, .. } => (LoopKind::For, slice(src, target.span).to_string()),
            _ => (LoopKind::While, String::new()),
        };

        let mut bound = Vec::new();
        collect_bound(stmt, &mut bound);

        let mut operations = Vec::new();
        for s in body_of(stmt) {
            collect_operations(s, src, &mut operations);
        }

        let input_datasets = input_datasets(stmt, &bound);
        let output_datasets = output_datasets(stmt, &bound);

        let mut relevant: Vec<String> = Vec::new();
        for n in output_datasets.iter().chain(&input_datasets).chain(&bound) {
            if !relevant.contains(n) {
                relevant.push(n.clone());
            }
        }
        let context = FragmentContext {
            function: self.functions.last().cloned(),
            init: relevant
                .iter()
                .map(|n| (n.clone(), flow::init_state(frames, n)))
                .collect(),
            live_after: relevant
                .iter()
                .filter(|n| flow::live_after(frames, n, src))
                .cloned()
                .collect(),
            sorted_after: output_datasets
                .iter()
                .filter_map(|n| flow::sorted_after(frames, n, src).map(|s| (n.clone(), s)))
                .collect(),
        };

        self.fragments.push(LoopFragment {
            id,
            start_line: stmt.span.line,
            end_line: stmt.span.end_line,
            is_nested: parent_id.is_some(),
            parent_id,
            loop_var,
            input_datasets,
            output_datasets,
            operations,
            kind,
            untranslatable: untranslatable_reason(stmt, true),
            depth: loop_depth(stmt),
            bound,
            context,
            stmt: stmt.clone(),
            source: self.source.clone(),
        });
        id
    }
}

fn slice(src: &str, span: Span) -> &str {
    &src[span.start..span.end]
}

fn body_of(stmt: &Stmt) -> &[Stmt] {
    match &stmt.kind {
        StmtKind::For { body, .. } | StmtKind::While { body, .. } => body,
        _ => &[],
    }
}

fn loop_depth(stmt: &Stmt) -> usize {
    let own = usize::from(stmt.kind.is_loop());
    let inner = stmt
        .blocks()
        .iter()
        .flat_map(|b| b.iter())
        .map(loop_depth)
        .max()
        .unwrap_or(0);
    own + inner
}

/// Names bound inside a loop statement, including its own target.
fn collect_bound(stmt: &Stmt, out: &mut Vec<String>) {
    stmt.walk(&mut |s| match &s.kind {
        StmtKind::For { target, .. } => flow::bound_names(target, out),
        StmtKind::Assign { targets, .. } => targets.iter().for_each(|t| flow::bound_names(t, out)),
        StmtKind::AnnAssign { target, .. } => flow::bound_names(target, out),
        _ => {}
    });
}

/// Free names of the expressions, skipping names used only as callees.
fn referenced_variables(exprs: &[&Expr]) -> Vec<String> {
    let mut ordered = exprs.to_vec();
    ordered.sort_by_key(|e| e.span.start);
    let mut out: Vec<String> = Vec::new();
    for e in ordered {
        let mut callees = Vec::new();
        e.walk(&mut |x| {
            if let ExprKind::Call { func, .. } = &x.kind {
                if func.as_name().is_some() {
                    callees.push(func.span.start);
                }
            }
        });
        let mut used = Vec::new();
        e.walk(&mut |x| {
            if let ExprKind::Name(n) = &x.kind {
                if !callees.contains(&x.span.start) {
                    used.push(n.clone());
                }
            }
        });
        for name in e.free_names() {
            if used.contains(&name) && !out.contains(&name) {
                out.push(name);
            }
        }
    }
    out
}

fn collect_operations(stmt: &Stmt, src: &str, out: &mut Vec<OperationRecord>) {
    let record = |kind, span: Span, exprs: &[&Expr]| OperationRecord {
        kind,
        expression: slice(src, span).trim().to_string(),
        variables: referenced_variables(exprs),
        line: span.line,
    };
    match &stmt.kind {
        StmtKind::If { test, body, orelse, .. } => {
            out.push(record(OperationKind::Conditional, test.span, &[test]));
            for s in body.iter().chain(orelse) {
                collect_operations(s, src, out);
            }
        }
        StmtKind::Expr(e) if matches!(e.kind, ExprKind::Call { .. }) => {
            let kind = if e.as_method_call().is_some() { OperationKind::MethodCall } else { OperationKind::FunctionCall };
            out.push(record(kind, stmt.span, &[e]));
        }
        StmtKind::Assign { .. } | StmtKind::AnnAssign { .. } => {
            out.push(record(OperationKind::Assign, stmt.span, &stmt.own_exprs()));
        }
        StmtKind::AugAssign { .. } => {
            out.push(record(OperationKind::AugmentedAssign, stmt.span, &stmt.own_exprs()));
        }
        _ => {
            for block in stmt.blocks() {
                for s in block {
                    collect_operations(s, src, out);
                }
            }
        }
    }
}

fn push_unique(out: &mut Vec<String>, name: &str) {
    if !out.iter().any(|n| n == name) {
        out.push(name.to_string());
    }
}

fn input_datasets(stmt: &Stmt, bound: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut first = true;
    stmt.walk(&mut |s| {
        if let StmtKind::For { iter, .. } = &s.kind {
            match iter.as_name() {
                Some(n) if first || !bound.iter().any(|b| b == n) => push_unique(&mut out, n),
                Some(_) => {}
                None => {
                    let called = iter.called_names();
                    for n in iter.free_names() {
                        if !called.contains(&n) && (first || !bound.contains(&n)) {
                            push_unique(&mut out, &n);
                        }
                    }
                }
            }
            first = false;
        }
    });
    out
}

const MUTATORS: &[&str] = &["append", "extend", "add", "insert", "update", "appendleft"];

fn output_datasets(stmt: &Stmt, bound: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for s in body_of(stmt) {
        s.walk(&mut |s| match &s.kind {
            StmtKind::Expr(e) => {
                if let Some((recv, method, ..)) = e.as_method_call() {
                    if MUTATORS.contains(&method) {
                        if let Some(root) = recv.root_name() {
                            push_unique(&mut out, root);
                        }
                    }
                }
            }
            StmtKind::AugAssign { target, .. } => {
                if let Some(root) = target.root_name() {
                    push_unique(&mut out, root);
                }
            }
            StmtKind::Assign { targets, .. } => {
                for t in targets {
                    if matches!(t.kind, ExprKind::Subscript { .. }) {
                        if let Some(root) = t.root_name() {
                            push_unique(&mut out, root);
                        }
                    }
                }
            }
            _ => {}
        });
    }
    out.retain(|n| !bound.contains(n));
    out
}

fn untranslatable_reason(stmt: &Stmt, top: bool) -> Option<String> {
    match &stmt.kind {
        StmtKind::While { .. } => {
            return Some(if top { "while loop".into() } else { "contains a while loop".into() });
        }
        StmtKind::For {
            target,
            iter,
            body,
            orelse,
        } => {
            if !orelse.is_empty() {
                return Some("for-else clause".into());
            }
            if target.as_name().is_none() {
                return Some("loop target is not a plain name".into());
            }
            if top && iter.as_name().is_none() {
                return Some("iterable is not a plain name".into());
            }
            for s in body {
                if let Some(reason) = untranslatable_reason(s, false) {
                    return Some(reason);
                }
            }
            return None;
        }
        _ => {}
    }
    let reason = match &stmt.kind {
        StmtKind::Return(_) => Some("return inside loop"),
        StmtKind::Break => Some("break inside loop"),
        StmtKind::Continue => Some("continue inside loop"),
        StmtKind::Raise(_) => Some("raise inside loop"),
        StmtKind::Delete(_) => Some("del inside loop"),
        StmtKind::Global(_) | StmtKind::Nonlocal(_) => Some("scope declaration inside loop"),
        StmtKind::Import(_) | StmtKind::ImportFrom { .. } => Some("import inside loop"),
        StmtKind::Assert(..) => Some("assert inside loop"),
        StmtKind::FunctionDef { .. } => Some("function definition inside loop"),
        StmtKind::Opaque { .. } => Some("unsupported compound statement inside loop"),
        _ => None,
    };
    if let Some(r) = reason {
        return Some(r.to_string());
    }
    let mut has_yield = false;
    for e in stmt.own_exprs() {
        e.walk(&mut |x| {
            has_yield |= matches!(x.kind, ExprKind::Yield(_) | ExprKind::YieldFrom(_) | ExprKind::Await(_));
        });
    }
    if has_yield {
        return Some("generator expression statement inside loop".into());
    }
    for block in stmt.blocks() {
        for s in block {
            if let Some(r) = untranslatable_reason(s, false) {
                return Some(r);
            }
        }
    }
    None
}
