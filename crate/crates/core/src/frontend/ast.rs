//! Syntax tree for the supported Python subset.
//!
//! Every node keeps the byte range it was parsed from, so later stages can
//! slice verbatim source text instead of pretty-printing.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    /// 1-based line of the first byte.
    pub line: usize,
    /// 1-based line of the last byte.
    pub end_line: usize,
    pub col: usize,
}

impl Span {
    pub fn cover(&self, other: &Span) -> Span {
        let (first, _) = if self.start <= other.start { (self, other) } else { (other, self) };
        let last = if self.end >= other.end { self } else { other };
        Span {
            start: first.start,
            end: last.end,
            line: first.line,
            end_line: last.end_line,
            col: first.col,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
    pub default: Option<Expr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Normal,
    VarArgs,
    KwArgs,
    /// Bare `*` or `/` markers.
    Marker,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    FunctionDef {
        name: String,
        params: Vec<Param>,
        body: Vec<Stmt>,
    },
    For {
        target: Expr,
        iter: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    While {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    If {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
        is_elif: bool,
    },
    Return(Option<Expr>),
    Assign {
        targets: Vec<Expr>,
        value: Expr,
    },
    AugAssign {
        target: Expr,
        op: BinOp,
        value: Expr,
    },
    AnnAssign {
        target: Expr,
        annotation: Expr,
        value: Option<Expr>,
    },
    Expr(Expr),
    Pass,
    Break,
    Continue,
    Raise(Option<Expr>),
    Assert(Expr, Option<Expr>),
    Delete(Vec<Expr>),
    Global(Vec<String>),
    Nonlocal(Vec<String>),
    Import(Vec<(String, Option<String>)>),
    ImportFrom {
        module: String,
        names: Vec<(String, Option<String>)>,
    },
    /// A compound statement outside the subset (`class`, `with`, `try`,
    /// `async ...`). Headers are kept as text; bodies are still parsed.
    Opaque {
        keyword: String,
        headers: Vec<Span>,
        bodies: Vec<Vec<Stmt>>,
    },
}

impl StmtKind {
    pub fn is_loop(&self) -> bool {
        matches!(self, StmtKind::For { .. } | StmtKind::While { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mult,
    MatMult,
    Div,
    FloorDiv,
    Mod,
    Pow,
    LShift,
    RShift,
    BitOr,
    BitXor,
    BitAnd,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mult => "*",
            BinOp::MatMult => "@",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
            BinOp::LShift => "<<",
            BinOp::RShift => ">>",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::BitAnd => "&",
        }
    }

    pub fn from_symbol(sym: &str) -> Option<BinOp> {
        Some(match sym {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mult,
            "@" => BinOp::MatMult,
            "/" => BinOp::Div,
            "//" => BinOp::FloorDiv,
            "%" => BinOp::Mod,
            "**" => BinOp::Pow,
            "<<" => BinOp::LShift,
            ">>" => BinOp::RShift,
            "|" => BinOp::BitOr,
            "^" => BinOp::BitXor,
            "&" => BinOp::BitAnd,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
    Pos,
    Invert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    NotEq,
    Lt,
    LtE,
    Gt,
    GtE,
    In,
    NotIn,
    Is,
    IsNot,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constant {
    Number(String),
    Str(String),
    True,
    False,
    None,
    Ellipsis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompKind {
    List,
    Set,
    Dict,
    Generator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompFor {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Keyword {
    /// `None` for `**kwargs` unpacking.
    pub name: Option<String>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(String),
    Constant(Constant),
    List(Vec<Expr>),
    Tuple(Vec<Expr>),
    Set(Vec<Expr>),
    /// `None` keys are `**mapping` unpacks.
    Dict(Vec<(Option<Expr>, Expr)>),
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Subscript {
        value: Box<Expr>,
        index: Box<Expr>,
    },
    Slice {
        lower: Option<Box<Expr>>,
        upper: Option<Box<Expr>>,
        step: Option<Box<Expr>>,
    },
    Call {
        func: Box<Expr>,
        args: Vec<Expr>,
        keywords: Vec<Keyword>,
    },
    BinOp {
        left: Box<Expr>,
        op: BinOp,
        right: Box<Expr>,
    },
    UnaryOp {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    BoolOp {
        op: BoolOp,
        values: Vec<Expr>,
    },
    Compare {
        left: Box<Expr>,
        ops: Vec<CmpOp>,
        comparators: Vec<Expr>,
    },
    IfExp {
        test: Box<Expr>,
        body: Box<Expr>,
        orelse: Box<Expr>,
    },
    Lambda {
        params: Vec<Param>,
        body: Box<Expr>,
    },
    Comprehension {
        kind: CompKind,
        elt: Box<Expr>,
        /// Value expression for dict comprehensions.
        value: Option<Box<Expr>>,
        generators: Vec<CompFor>,
    },
    Starred(Box<Expr>),
    NamedExpr {
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Yield(Option<Box<Expr>>),
    YieldFrom(Box<Expr>),
    Await(Box<Expr>),
}

impl Expr {
    pub fn as_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Name(n) => Some(n),
            _ => None,
        }
    }

    /// The leftmost name of an attribute/subscript/call chain, e.g. `groups`
    /// for `groups.setdefault(k, []).append`.
    pub fn root_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Name(n) => Some(n),
            ExprKind::Attribute { value, .. } | ExprKind::Subscript { value, .. } => value.root_name(),
            ExprKind::Call { func, .. } => func.root_name(),
            _ => None,
        }
    }

    /// Method call of the form `<receiver>.<method>(args)`.
    pub fn as_method_call(&self) -> Option<(&Expr, &str, &[Expr], &[Keyword])> {
        match &self.kind {
            ExprKind::Call { func, args, keywords } => match &func.kind {
                ExprKind::Attribute { value, attr } => Some((value, attr.as_str(), args, keywords)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Free variable names read by this expression, in first-occurrence order.
    pub fn free_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_names(self, &mut Vec::new(), &mut out);
        out
    }

    /// Names that appear only as the callee of a direct call, e.g. `len` in
    /// `len(xs)`.
    pub fn called_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::Call { func, .. } = &e.kind {
                if let ExprKind::Name(n) = &func.kind {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
            }
        });
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.free_names().iter().any(|n| n == name)
    }

    /// Pre-order traversal over this expression and every sub-expression.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Name(_) | ExprKind::Constant(_) => vec![],
            ExprKind::List(items) | ExprKind::Tuple(items) | ExprKind::Set(items) => items.iter().collect(),
            ExprKind::Dict(pairs) => pairs
                .iter()
                .flat_map(|(k, v)| k.iter().chain(std::iter::once(v)))
                .collect(),
            ExprKind::Attribute { value, .. } => vec![value],
            ExprKind::Subscript { value, index } => vec![value, index],
            ExprKind::Slice { lower, upper, step } => {
                lower.iter().chain(upper.iter()).chain(step.iter()).map(|b| &**b).collect()
            }
            ExprKind::Call { func, args, keywords } => std::iter::once(&**func)
                .chain(args.iter())
                .chain(keywords.iter().map(|k| &k.value))
                .collect(),
            ExprKind::BinOp { left, right, .. } => vec![left, right],
            ExprKind::UnaryOp { operand, .. } => vec![operand],
            ExprKind::BoolOp { values, .. } => values.iter().collect(),
            ExprKind::Compare { left, comparators, .. } => {
                std::iter::once(&**left).chain(comparators.iter()).collect()
            }
            ExprKind::IfExp { test, body, orelse } => vec![body, test, orelse],
            ExprKind::Lambda { params, body } => params
                .iter()
                .filter_map(|p| p.default.as_ref())
                .chain(std::iter::once(&**body))
                .collect(),
            ExprKind::Comprehension { elt, value, generators, .. } => {
                let mut v: Vec<&Expr> = Vec::new();
                for g in generators {
                    v.push(&g.iter);
                    v.push(&g.target);
                    v.extend(g.ifs.iter());
                }
                v.push(elt);
                if let Some(val) = value {
                    v.push(val);
                }
                v
            }
            ExprKind::Starred(e) | ExprKind::YieldFrom(e) | ExprKind::Await(e) => vec![e],
            ExprKind::NamedExpr { target, value } => vec![target, value],
            ExprKind::Yield(e) => e.iter().map(|b| &**b).collect(),
        }
    }
}

fn push_unique(out: &mut Vec<String>, name: &str) {
    if !out.iter().any(|n| n == name) {
        out.push(name.to_string());
    }
}

fn collect_names(expr: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match &expr.kind {
        ExprKind::Name(n) => {
            if !bound.contains(n) {
                push_unique(out, n);
            }
        }
        ExprKind::Lambda { params, body } => {
            for p in params {
                if let Some(d) = &p.default {
                    collect_names(d, bound, out);
                }
            }
            let mark = bound.len();
            bound.extend(params.iter().map(|p| p.name.clone()));
            collect_names(body, bound, out);
            bound.truncate(mark);
        }
        ExprKind::Comprehension { elt, value, generators, .. } => {
            let mark = bound.len();
            for (i, g) in generators.iter().enumerate() {
                // The first iterable is evaluated in the enclosing scope.
                if i == 0 {
                    let inner = bound.split_off(mark);
                    collect_names(&g.iter, bound, out);
                    bound.extend(inner);
                } else {
                    collect_names(&g.iter, bound, out);
                }
                let mut targets = Vec::new();
                collect_names(&g.target, &mut Vec::new(), &mut targets);
                bound.extend(targets);
                for cond in &g.ifs {
                    collect_names(cond, bound, out);
                }
            }
            collect_names(elt, bound, out);
            if let Some(v) = value {
                collect_names(v, bound, out);
            }
            bound.truncate(mark);
        }
        ExprKind::NamedExpr { target, value } => {
            collect_names(value, bound, out);
            collect_names(target, bound, out);
        }
        _ => {
            for child in expr.children() {
                collect_names(child, bound, out);
            }
        }
    }
}

impl Stmt {
    /// Child statement blocks in source order.
    pub fn blocks(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::FunctionDef { body, .. } => vec![body],
            StmtKind::For { body, orelse, .. }
            | StmtKind::While { body, orelse, .. }
            | StmtKind::If { body, orelse, .. } => vec![body, orelse],
            StmtKind::Opaque { bodies, .. } => bodies.iter().map(|b| b.as_slice()).collect(),
            _ => vec![],
        }
    }

    /// Expressions evaluated directly by this statement (not by nested
    /// statements), in evaluation order.
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::FunctionDef { params, .. } => params.iter().filter_map(|p| p.default.as_ref()).collect(),
            StmtKind::For { target, iter, .. } => vec![iter, target],
            StmtKind::While { test, .. } | StmtKind::If { test, .. } => vec![test],
            StmtKind::Return(e) | StmtKind::Raise(e) => e.iter().collect(),
            StmtKind::Assign { targets, value } => std::iter::once(value).chain(targets.iter()).collect(),
            StmtKind::AugAssign { target, value, .. } => vec![value, target],
            StmtKind::AnnAssign { target, annotation, value } => {
                value.iter().chain([annotation, target]).collect()
            }
            StmtKind::Expr(e) => vec![e],
            StmtKind::Assert(a, b) => std::iter::once(a).chain(b.iter()).collect(),
            StmtKind::Delete(es) => es.iter().collect(),
            _ => vec![],
        }
    }

    /// Pre-order traversal over this statement and all nested statements.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        for block in self.blocks() {
            for s in block {
                s.walk(f);
            }
        }
    }
}
