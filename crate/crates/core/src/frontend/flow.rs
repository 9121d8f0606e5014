//! Intra-procedural facts about a loop's surroundings: how each output was
//! initialised before the loop, which names are read after it, and whether
//! the result is sorted right afterwards.
//!
//! The analyses walk a path of frames from the module down to the loop
//! statement. They are syntactic and deliberately conservative.

use super::ast::*;

/// One level of the path from the module to a statement.
#[derive(Debug, Clone, Copy)]
pub struct Frame<'a> {
    pub block: &'a [Stmt],
    pub index: usize,
    pub owner: Owner<'a>,
}

#[derive(Debug, Clone, Copy)]
pub enum Owner<'a> {
    Module,
    Function(&'a Stmt),
    /// A loop, `if` or opaque compound statement.
    Compound(&'a Stmt),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitState {
    EmptyList,
    EmptyDict,
    EmptySet,
    EmptyStr,
    Zero,
    ZeroFloat,
    One,
    /// Assigned some other value.
    Other,
    /// Written by earlier code (another loop, a method call, an enclosing
    /// loop's previous iterations).
    Modified,
    /// A parameter of the enclosing function, never reassigned.
    Param,
    Unknown,
}

impl InitState {
    pub fn is_numeric_zero(self) -> bool {
        matches!(self, InitState::Zero | InitState::ZeroFloat)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SortSpec {
    /// Source text of the `key=` argument.
    pub key: Option<String>,
    pub reverse: bool,
}

pub fn init_state(frames: &[Frame], name: &str) -> InitState {
    let mut crossed_loop = false;
    for frame in frames.iter().rev() {
        for stmt in frame.block[..frame.index].iter().rev() {
            if let Some(state) = classify_definition(stmt, name) {
                return if crossed_loop && state != InitState::Param { InitState::Modified } else { state };
            }
        }
        match frame.owner {
            Owner::Module => return InitState::Unknown,
            Owner::Function(def) => {
                let is_param = matches!(&def.kind, StmtKind::FunctionDef { params, .. } if params.iter().any(|p| p.name == name));
                return match (is_param, crossed_loop) {
                    (true, false) => InitState::Param,
                    (true, true) => InitState::Modified,
                    (false, _) => InitState::Unknown,
                };
            }
            Owner::Compound(stmt) => {
                if stmt.kind.is_loop() {
                    crossed_loop = true;
                    // The header target is rebound on every iteration.
                    if let StmtKind::For { target, .. } = &stmt.kind {
                        if binds(target, name) {
                            return InitState::Other;
                        }
                    }
                }
            }
        }
    }
    InitState::Unknown
}

/// Raw literal text such as `''`, `""` or `b''`.
fn is_empty_literal(raw: &str) -> bool {
    let body = raw.trim_start_matches(|c: char| c.is_ascii_alphabetic());
    let mut chars = body.chars();
    match chars.next() {
        Some(q @ ('\'' | '"')) => chars.all(|c| c == q),
        _ => false,
    }
}

fn classify_value(value: &Expr) -> InitState {
    match &value.kind {
        ExprKind::List(items) if items.is_empty() => InitState::EmptyList,
        ExprKind::Dict(items) if items.is_empty() => InitState::EmptyDict,
        ExprKind::Constant(Constant::Str(s)) if is_empty_literal(s) => InitState::EmptyStr,
        ExprKind::Constant(Constant::Number(n)) => match n.as_str() {
            "0" => InitState::Zero,
            "0.0" | "0." => InitState::ZeroFloat,
            "1" => InitState::One,
            _ => InitState::Other,
        },
        ExprKind::Call { func, args, keywords } if args.is_empty() && keywords.is_empty() => {
            match func.as_name() {
                Some("list") => InitState::EmptyList,
                Some("dict") => InitState::EmptyDict,
                Some("set") => InitState::EmptySet,
                Some("str") => InitState::EmptyStr,
                Some("int") => InitState::Zero,
                Some("float") => InitState::ZeroFloat,
                _ => InitState::Other,
            }
        }
        _ => InitState::Other,
    }
}

fn classify_definition(stmt: &Stmt, name: &str) -> Option<InitState> {
    match &stmt.kind {
        StmtKind::Assign { targets, value } => {
            if targets.iter().any(|t| t.as_name() == Some(name)) {
                return Some(classify_value(value));
            }
            if targets.iter().any(|t| binds(t, name)) {
                return Some(InitState::Other);
            }
        }
        StmtKind::AnnAssign {
            target,
            value: Some(value),
            ..
        } if target.as_name() == Some(name) => return Some(classify_value(value)),
        _ => {}
    }
    if stmt_writes(stmt, name) {
        Some(InitState::Modified)
    } else {
        None
    }
}

/// Whether `target` (an assignment or loop target) binds `name`.
pub fn binds(target: &Expr, name: &str) -> bool {
    match &target.kind {
        ExprKind::Name(n) => n == name,
        ExprKind::Tuple(items) | ExprKind::List(items) => items.iter().any(|t| binds(t, name)),
        ExprKind::Starred(inner) => binds(inner, name),
        _ => false,
    }
}

/// Names bound by an assignment or loop target.
pub fn bound_names(target: &Expr, out: &mut Vec<String>) {
    match &target.kind {
        ExprKind::Name(n) => {
            if !out.contains(n) {
                out.push(n.clone());
            }
        }
        ExprKind::Tuple(items) | ExprKind::List(items) => items.iter().for_each(|t| bound_names(t, out)),
        ExprKind::Starred(inner) => bound_names(inner, out),
        _ => {}
    }
}

/// Whether the statement (or anything nested in it) may change `name`:
/// rebinding, augmented assignment, item assignment or a method call on it.
pub fn stmt_writes(stmt: &Stmt, name: &str) -> bool {
    let mut found = false;
    stmt.walk(&mut |s| {
        if found {
            return;
        }
        found = match &s.kind {
            StmtKind::Assign { targets, .. } => targets.iter().any(|t| binds(t, name) || target_root_is(t, name)),
            StmtKind::AnnAssign { target, value, .. } => value.is_some() && (binds(target, name) || target_root_is(target, name)),
            StmtKind::AugAssign { target, .. } => target.root_name() == Some(name),
            StmtKind::For { target, .. } => binds(target, name),
            StmtKind::Delete(targets) => targets.iter().any(|t| t.root_name() == Some(name)),
            StmtKind::FunctionDef { name: n, .. } => n == name,
            StmtKind::Expr(e) => matches!(e.as_method_call(), Some((recv, ..)) if recv.root_name() == Some(name)),
            _ => false,
        };
    });
    found
}

fn target_root_is(target: &Expr, name: &str) -> bool {
    matches!(target.kind, ExprKind::Subscript { .. } | ExprKind::Attribute { .. }) && target.root_name() == Some(name)
}

/// Whether a target expression reads `name` (item/attribute targets read
/// their base; plain names do not).
fn target_reads(target: &Expr, name: &str) -> bool {
    match &target.kind {
        ExprKind::Name(_) => false,
        ExprKind::Tuple(items) | ExprKind::List(items) => items.iter().any(|t| target_reads(t, name)),
        ExprKind::Starred(inner) => target_reads(inner, name),
        _ => target.mentions(name),
    }
}

fn is_identifier_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

fn text_mentions(text: &str, name: &str) -> bool {
    let bytes = text.as_bytes();
    text.match_indices(name).any(|(i, _)| {
        let before = i == 0 || !is_identifier_byte(bytes[i - 1]);
        let after = i + name.len() >= bytes.len() || !is_identifier_byte(bytes[i + name.len()]);
        before && after
    })
}

/// Whether executing the statement may read `name`.
pub fn stmt_reads(stmt: &Stmt, name: &str, src: &str) -> bool {
    match &stmt.kind {
        StmtKind::Assign { targets, value } => value.mentions(name) || targets.iter().any(|t| target_reads(t, name)),
        StmtKind::AnnAssign { target, value, .. } => {
            value.as_ref().is_some_and(|v| v.mentions(name)) || target_reads(target, name)
        }
        StmtKind::AugAssign { target, value, .. } => value.mentions(name) || target.mentions(name),
        StmtKind::For {
            target,
            iter,
            body,
            orelse,
        } => {
            iter.mentions(name)
                || target_reads(target, name)
                || body.iter().chain(orelse).any(|s| stmt_reads(s, name, src))
        }
        StmtKind::Delete(targets) => targets.iter().any(|t| target_reads(t, name)),
        // Conservative: any mention inside a nested function counts.
        StmtKind::FunctionDef { .. } => text_mentions(&src[stmt.span.start..stmt.span.end], name),
        StmtKind::Opaque { headers, bodies, .. } => {
            headers.iter().any(|h| text_mentions(&src[h.start..h.end], name))
                || bodies.iter().flatten().any(|s| stmt_reads(s, name, src))
        }
        StmtKind::Global(names) | StmtKind::Nonlocal(names) => names.iter().any(|n| n == name),
        _ => {
            stmt.own_exprs().iter().any(|e| e.mentions(name))
                || stmt.blocks().iter().any(|b| b.iter().any(|s| stmt_reads(s, name, src)))
        }
    }
}

/// Whether the statement unconditionally rebinds `name` (after any read).
fn stmt_kills(stmt: &Stmt, name: &str) -> bool {
    match &stmt.kind {
        StmtKind::Assign { targets, .. } => targets.iter().any(|t| binds(t, name)),
        StmtKind::AnnAssign {
            target, value: Some(_), ..
        } => binds(target, name),
        StmtKind::For { target, .. } => binds(target, name),
        StmtKind::Delete(targets) => targets.iter().any(|t| t.as_name() == Some(name)),
        StmtKind::FunctionDef { name: n, .. } => n == name,
        _ => false,
    }
}

enum Scan {
    Read,
    Killed,
    Exited,
    Fallthrough,
}

fn scan_forward(stmts: &[Stmt], name: &str, src: &str) -> Scan {
    for stmt in stmts {
        if let StmtKind::For { target, iter, orelse, .. } = &stmt.kind {
            // The header rebinds `name` before the body can read it. The old
            // value survives only when the loop runs zero times.
            if binds(target, name) {
                if iter.mentions(name) || orelse.iter().any(|s| stmt_reads(s, name, src)) {
                    return Scan::Read;
                }
                continue;
            }
        }
        if stmt_reads(stmt, name, src) {
            return Scan::Read;
        }
        if matches!(stmt.kind, StmtKind::Return(_) | StmtKind::Raise(_)) {
            return Scan::Exited;
        }
        if stmt_kills(stmt, name) {
            return Scan::Killed;
        }
    }
    Scan::Fallthrough
}

/// Whether the value `name` holds when the statement at the end of `frames`
/// finishes can be observed later.
pub fn live_after(frames: &[Frame], name: &str, src: &str) -> bool {
    for frame in frames.iter().rev() {
        match scan_forward(&frame.block[frame.index + 1..], name, src) {
            Scan::Read => return true,
            Scan::Killed | Scan::Exited => return false,
            Scan::Fallthrough => {}
        }
        match frame.owner {
            Owner::Module => return true,
            Owner::Function(_) => return false,
            Owner::Compound(stmt) => {
                if let StmtKind::For { target, .. } | StmtKind::While { test: target, .. } = &stmt.kind {
                    // Next iteration of the enclosing loop: header, then the
                    // body up to and including the statement on our path.
                    let rebinds = matches!(stmt.kind, StmtKind::For { .. }) && binds(target, name);
                    let header_reads = matches!(stmt.kind, StmtKind::While { .. }) && target.mentions(name);
                    if header_reads {
                        return true;
                    }
                    if !rebinds {
                        if let Scan::Read = scan_forward(&frame.block[..=frame.index], name, src) {
                            return true;
                        }
                    }
                    // Loop exit: the else block runs, then whatever follows.
                    let orelse = match &stmt.kind {
                        StmtKind::For { orelse, .. } | StmtKind::While { orelse, .. } => orelse.as_slice(),
                        _ => &[],
                    };
                    match scan_forward(orelse, name, src) {
                        Scan::Read => return true,
                        Scan::Killed | Scan::Exited => return false,
                        Scan::Fallthrough => {}
                    }
                }
            }
        }
    }
    true
}

/// The sort applied to `name` right after the statement at the end of
/// `frames`, if any: `name.sort(...)`, `name = sorted(name, ...)` or
/// `return sorted(name, ...)`.
pub fn sorted_after(frames: &[Frame], name: &str, src: &str) -> Option<SortSpec> {
    let frame = frames.last()?;
    let next = frame.block.get(frame.index + 1)?;
    let call = match &next.kind {
        StmtKind::Expr(e) => {
            let (recv, method, args, keywords) = e.as_method_call()?;
            if recv.as_name() != Some(name) || method != "sort" || !args.is_empty() {
                return None;
            }
            keywords
        }
        StmtKind::Assign { targets, value } if targets.len() == 1 && targets[0].as_name() == Some(name) => {
            sorted_call(value, name)?
        }
        StmtKind::Return(Some(value)) => sorted_call(value, name)?,
        _ => return None,
    };
    let mut spec = SortSpec {
        key: None,
        reverse: false,
    };
    for kw in call {
        match kw.name.as_deref() {
            Some("key") => spec.key = Some(src[kw.value.span.start..kw.value.span.end].to_string()),
            Some("reverse") => match &kw.value.kind {
                ExprKind::Constant(Constant::True) => spec.reverse = true,
                ExprKind::Constant(Constant::False) => spec.reverse = false,
                _ => return None,
            },
            _ => return None,
        }
    }
    Some(spec)
}

fn sorted_call<'a>(value: &'a Expr, name: &str) -> Option<&'a [Keyword]> {
    match &value.kind {
        ExprKind::Call { func, args, keywords }
            if func.as_name() == Some("sorted") && args.len() == 1 && args[0].as_name() == Some(name) =>
        {
            Some(keywords)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_module;

    /// Path to the first `for` statement found by pre-order search.
    fn first_loop_frames(module: &Module, nth: usize) -> Vec<Frame<'_>> {
        fn go<'a>(block: &'a [Stmt], owner: Owner<'a>, path: &mut Vec<Frame<'a>>, seen: &mut usize, nth: usize) -> bool {
            for (i, s) in block.iter().enumerate() {
                path.push(Frame { block, index: i, owner });
                if s.kind.is_loop() {
                    if *seen == nth {
                        return true;
                    }
                    *seen += 1;
                }
                let inner = if matches!(s.kind, StmtKind::FunctionDef { .. }) { Owner::Function(s) } else { Owner::Compound(s) };
                for b in s.blocks() {
                    if go(b, inner, path, seen, nth) {
                        return true;
                    }
                }
                path.pop();
            }
            false
        }
        let mut path = Vec::new();
        assert!(go(&module.body, Owner::Module, &mut path, &mut 0, nth));
        path
    }

    const EVEN: &str = "def even_filter(numbers):\n    evens = []\n    for num in numbers:\n        if num % 2 == 0:\n            evens.append(num)\n    return evens\n";

    #[test]
    fn init_states() {
        let m = parse_module(EVEN).unwrap();
        let f = first_loop_frames(&m, 0);
        assert_eq!(init_state(&f, "evens"), InitState::EmptyList);
        assert_eq!(init_state(&f, "numbers"), InitState::Param);
        assert_eq!(init_state(&f, "other"), InitState::Unknown);
    }

    #[test]
    fn second_loop_sees_prepopulated_output() {
        let src = "def merge(a, b):\n    out = []\n    for x in a:\n        out.append(x)\n    for y in b:\n        out.append(y)\n    return out\n";
        let m = parse_module(src).unwrap();
        assert_eq!(init_state(&first_loop_frames(&m, 0), "out"), InitState::EmptyList);
        assert_eq!(init_state(&first_loop_frames(&m, 1), "out"), InitState::Modified);
    }

    #[test]
    fn inner_loop_crosses_outer_body() {
        let src = "def f(xss):\n    total = 0\n    for xs in xss:\n        for x in xs:\n            total += x\n    return total\n";
        let m = parse_module(src).unwrap();
        assert_eq!(init_state(&first_loop_frames(&m, 0), "total"), InitState::Zero);
        assert_eq!(init_state(&first_loop_frames(&m, 1), "total"), InitState::Modified);
    }

    #[test]
    fn liveness() {
        let m = parse_module(EVEN).unwrap();
        let f = first_loop_frames(&m, 0);
        assert!(live_after(&f, "evens", EVEN));
        assert!(!live_after(&f, "num", EVEN));

        let src = "def f(xs):\n    t = 0\n    for x in xs:\n        t += x\n    t = 5\n    return t\n";
        let m = parse_module(src).unwrap();
        assert!(!live_after(&first_loop_frames(&m, 0), "t", src));

        let src = "for x in xs:\n    y = x\n";
        let m = parse_module(src).unwrap();
        assert!(live_after(&first_loop_frames(&m, 0), "y", src), "module globals stay live");
    }

    #[test]
    fn liveness_wraps_around_enclosing_loop() {
        let src = "def f(xss):\n    for xs in xss:\n        print(acc)\n        acc = []\n        for x in xs:\n            acc.append(x)\n    return 1\n";
        let m = parse_module(src).unwrap();
        assert!(live_after(&first_loop_frames(&m, 1), "acc", src));
        let src = "def f(xss):\n    for xs in xss:\n        acc = []\n        for x in xs:\n            acc.append(x)\n    return acc\n";
        let m = parse_module(src).unwrap();
        assert!(live_after(&first_loop_frames(&m, 1), "acc", src), "read after the outer loop exits");
    }

    #[test]
    fn sort_detection() {
        let src = "def f(xs):\n    out = []\n    for x in xs:\n        out.append(x)\n    out.sort(key=len, reverse=True)\n    return out\n";
        let m = parse_module(src).unwrap();
        let spec = sorted_after(&first_loop_frames(&m, 0), "out", src).unwrap();
        assert_eq!(spec.key.as_deref(), Some("len"));
        assert!(spec.reverse);

        let src = "def f(xs):\n    out = []\n    for x in xs:\n        out.append(x)\n    return sorted(out)\n";
        let m = parse_module(src).unwrap();
        assert_eq!(
            sorted_after(&first_loop_frames(&m, 0), "out", src),
            Some(SortSpec {
                key: None,
                reverse: false
            })
        );
    }
}
