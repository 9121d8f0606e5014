//! Recursive-descent parser for the supported Python subset.
//!
//! The grammar covers everything the translator needs to reason about plus
//! enough of the rest of the language to pass unknown constructs through:
//! `class`, `with`, `try` and `async` blocks are parsed as opaque compound
//! statements whose bodies are still visited.

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in",
    "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with",
    "yield",
];

pub fn parse_module(src: &str) -> Result<Module, ParseError> {
    let tokens = tokenize(src).map_err(|e| ParseError {
        message: e.message,
        line: e.line,
        col: e.col,
    })?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut body = Vec::new();
    while !parser.at(&TokenKind::EndMarker) {
        if parser.eat_kind(&TokenKind::Newline) {
            continue;
        }
        body.extend(parser.statement()?);
    }
    Ok(Module { body })
}

/// Parses a standalone expression (the whole input must be one expression).
pub fn parse_expression(src: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src).map_err(|e| ParseError {
        message: e.message,
        line: e.line,
        col: e.col,
    })?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.testlist_star()?;
    parser.eat_kind(&TokenKind::Newline);
    if !parser.at(&TokenKind::EndMarker) {
        return Err(parser.error("unexpected trailing input after expression"));
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

fn span_of(tok: &Token) -> Span {
    Span {
        start: tok.start,
        end: tok.end,
        line: tok.line,
        end_line: tok.end_line,
        col: tok.col,
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_nth(&self, n: usize) -> &Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> Token {
        let tok = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Op(o) if *o == op)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Name(n) if n == kw)
    }

    fn eat_kind(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let tok = self.peek();
        ParseError {
            message: message.into(),
            line: tok.line,
            col: tok.col,
        }
    }

    fn unexpected(&self) -> ParseError {
        self.error(format!("invalid syntax: unexpected {}", self.peek().kind))
    }

    fn expect_op(&mut self, op: &str) -> Result<Token, ParseError> {
        if self.at_op(op) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected `{op}`, found {}", self.peek().kind)))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Token, ParseError> {
        if self.at_keyword(kw) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected `{kw}`, found {}", self.peek().kind)))
        }
    }

    fn expect_name(&mut self) -> Result<(String, Token), ParseError> {
        match &self.peek().kind {
            TokenKind::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                let n = n.clone();
                Ok((n, self.advance()))
            }
            _ => Err(self.error(format!("expected identifier, found {}", self.peek().kind))),
        }
    }

    fn expect_newline(&mut self) -> Result<(), ParseError> {
        if self.eat_kind(&TokenKind::Newline) || self.at(&TokenKind::EndMarker) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    /// Span running from `start` to the end of the previously consumed token.
    fn span_from(&self, start: Span) -> Span {
        let mut i = self.pos.saturating_sub(1);
        while i > 0 && matches!(self.tokens[i].kind, TokenKind::Newline | TokenKind::Indent | TokenKind::Dedent | TokenKind::EndMarker) {
            i -= 1;
        }
        let prev = &self.tokens[i];
        Span {
            start: start.start,
            end: prev.end,
            line: start.line,
            end_line: prev.end_line,
            col: start.col,
        }
    }

    // ----- statements -------------------------------------------------------

    fn statement(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Indent => Err(self.error("unexpected indent")),
            TokenKind::Name(kw) => match kw.as_str() {
                "def" => Ok(vec![self.funcdef()?]),
                "if" => Ok(vec![self.if_stmt(false)?]),
                "for" => Ok(vec![self.for_stmt()?]),
                "while" => Ok(vec![self.while_stmt()?]),
                "class" | "with" | "try" | "async" => Ok(vec![self.opaque()?]),
                _ => self.simple_statements(),
            },
            TokenKind::Op("@") => Ok(vec![self.decorated()?]),
            _ => self.simple_statements(),
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        if self.eat_kind(&TokenKind::Newline) {
            if !self.eat_kind(&TokenKind::Indent) {
                return Err(self.error("expected an indented block"));
            }
            let mut body = Vec::new();
            while !self.eat_kind(&TokenKind::Dedent) {
                if self.at(&TokenKind::EndMarker) {
                    break;
                }
                if self.eat_kind(&TokenKind::Newline) {
                    continue;
                }
                body.extend(self.statement()?);
            }
            Ok(body)
        } else {
            self.simple_statements()
        }
    }

    fn compound_span(&self, start: Span, bodies: &[&[Stmt]]) -> Span {
        let mut span = self.span_from(start);
        for body in bodies {
            if let Some(last) = body.last() {
                span = span.cover(&last.span);
            }
        }
        span
    }

    fn funcdef(&mut self) -> Result<Stmt, ParseError> {
        let start = span_of(&self.expect_keyword("def")?);
        let (name, _) = self.expect_name()?;
        self.expect_op("(")?;
        let params = self.params(")", true)?;
        self.expect_op(")")?;
        if self.eat_op("->") {
            self.test()?;
        }
        self.expect_op(":")?;
        let body = self.block()?;
        let span = self.compound_span(start, &[&body]);
        Ok(Stmt {
            kind: StmtKind::FunctionDef { name, params, body },
            span,
        })
    }

    fn params(&mut self, close: &str, annotations: bool) -> Result<Vec<Param>, ParseError> {
        let mut params = Vec::new();
        while !self.at_op(close) {
            let param = if self.eat_op("/") {
                Param {
                    name: "/".into(),
                    kind: ParamKind::Marker,
                    default: None,
                }
            } else if self.eat_op("**") {
                let (name, _) = self.expect_name()?;
                if annotations && self.eat_op(":") {
                    self.test()?;
                }
                Param {
                    name,
                    kind: ParamKind::KwArgs,
                    default: None,
                }
            } else if self.eat_op("*") {
                if self.at_op(",") || self.at_op(close) {
                    Param {
                        name: "*".into(),
                        kind: ParamKind::Marker,
                        default: None,
                    }
                } else {
                    let (name, _) = self.expect_name()?;
                    if annotations && self.eat_op(":") {
                        self.test()?;
                    }
                    Param {
                        name,
                        kind: ParamKind::VarArgs,
                        default: None,
                    }
                }
            } else {
                let (name, _) = self.expect_name()?;
                if annotations && self.eat_op(":") {
                    self.test()?;
                }
                let default = if self.eat_op("=") { Some(self.test()?) } else { None };
                Param {
                    name,
                    kind: ParamKind::Normal,
                    default,
                }
            };
            params.push(param);
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(params)
    }

    fn if_stmt(&mut self, is_elif: bool) -> Result<Stmt, ParseError> {
        let start = span_of(&self.advance());
        let test = self.named_test()?;
        self.expect_op(":")?;
        let body = self.block()?;
        let orelse = if self.at_keyword("elif") {
            vec![self.if_stmt(true)?]
        } else if self.eat_keyword("else") {
            self.expect_op(":")?;
            self.block()?
        } else {
            Vec::new()
        };
        let span = self.compound_span(start, &[&body, &orelse]);
        Ok(Stmt {
            kind: StmtKind::If {
                test,
                body,
                orelse,
                is_elif,
            },
            span,
        })
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = span_of(&self.expect_keyword("for")?);
        let target = self.target_list()?;
        self.expect_keyword("in")?;
        let iter = self.testlist_star()?;
        self.expect_op(":")?;
        let body = self.block()?;
        let orelse = if self.eat_keyword("else") {
            self.expect_op(":")?;
            self.block()?
        } else {
            Vec::new()
        };
        let span = self.compound_span(start, &[&body, &orelse]);
        Ok(Stmt {
            kind: StmtKind::For {
                target,
                iter,
                body,
                orelse,
            },
            span,
        })
    }

    fn while_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = span_of(&self.expect_keyword("while")?);
        let test = self.named_test()?;
        self.expect_op(":")?;
        let body = self.block()?;
        let orelse = if self.eat_keyword("else") {
            self.expect_op(":")?;
            self.block()?
        } else {
            Vec::new()
        };
        let span = self.compound_span(start, &[&body, &orelse]);
        Ok(Stmt {
            kind: StmtKind::While { test, body, orelse },
            span,
        })
    }

    fn decorated(&mut self) -> Result<Stmt, ParseError> {
        let start = span_of(self.peek());
        while self.eat_op("@") {
            self.named_test()?;
            self.expect_newline()?;
        }
        let mut inner = match self.peek().kind.clone() {
            TokenKind::Name(kw) if kw == "def" => self.funcdef()?,
            TokenKind::Name(kw) if kw == "class" || kw == "async" => self.opaque()?,
            _ => return Err(self.error("expected `def` or `class` after decorator")),
        };
        inner.span = Span {
            start: start.start,
            line: start.line,
            col: start.col,
            ..inner.span
        };
        Ok(inner)
    }

    /// Skips a compound-statement header up to its top-level `:`.
    fn skip_header(&mut self) -> Result<Span, ParseError> {
        let start = span_of(self.peek());
        let mut depth = 0usize;
        loop {
            let tok = self.peek().clone();
            match tok.kind {
                TokenKind::Op("(") | TokenKind::Op("[") | TokenKind::Op("{") => depth += 1,
                TokenKind::Op(")") | TokenKind::Op("]") | TokenKind::Op("}") => depth = depth.saturating_sub(1),
                TokenKind::Op(":") if depth == 0 => {
                    let span = self.span_from(start);
                    self.advance();
                    return Ok(span);
                }
                TokenKind::Newline | TokenKind::EndMarker => {
                    return Err(self.error("expected `:` at end of compound statement header"))
                }
                _ => {}
            }
            self.advance();
        }
    }

    fn opaque(&mut self) -> Result<Stmt, ParseError> {
        let keyword = match &self.peek().kind {
            TokenKind::Name(n) => n.clone(),
            _ => return Err(self.unexpected()),
        };
        let start = span_of(self.peek());
        let mut headers = vec![self.skip_header()?];
        let mut bodies = vec![self.block()?];
        if keyword == "try" {
            while self.at_keyword("except") || self.at_keyword("else") || self.at_keyword("finally") {
                headers.push(self.skip_header()?);
                bodies.push(self.block()?);
            }
        }
        let refs: Vec<&[Stmt]> = bodies.iter().map(|b| b.as_slice()).collect();
        let span = self.compound_span(start, &refs);
        Ok(Stmt {
            kind: StmtKind::Opaque {
                keyword,
                headers,
                bodies,
            },
            span,
        })
    }

    fn simple_statements(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut stmts = vec![self.small_statement()?];
        while self.eat_op(";") {
            if self.at(&TokenKind::Newline) || self.at(&TokenKind::EndMarker) {
                break;
            }
            stmts.push(self.small_statement()?);
        }
        self.expect_newline()?;
        Ok(stmts)
    }

    fn small_statement(&mut self) -> Result<Stmt, ParseError> {
        let start = span_of(self.peek());
        let kind = match self.peek().kind.clone() {
            TokenKind::Name(kw) => match kw.as_str() {
                "pass" => {
                    self.advance();
                    StmtKind::Pass
                }
                "break" => {
                    self.advance();
                    StmtKind::Break
                }
                "continue" => {
                    self.advance();
                    StmtKind::Continue
                }
                "return" => {
                    self.advance();
                    if self.at_statement_end() {
                        StmtKind::Return(None)
                    } else {
                        StmtKind::Return(Some(self.testlist_star()?))
                    }
                }
                "raise" => {
                    self.advance();
                    if self.at_statement_end() {
                        StmtKind::Raise(None)
                    } else {
                        let e = self.test()?;
                        if self.eat_keyword("from") {
                            self.test()?;
                        }
                        StmtKind::Raise(Some(e))
                    }
                }
                "global" | "nonlocal" => {
                    self.advance();
                    let mut names = vec![self.expect_name()?.0];
                    while self.eat_op(",") {
                        names.push(self.expect_name()?.0);
                    }
                    if kw == "global" {
                        StmtKind::Global(names)
                    } else {
                        StmtKind::Nonlocal(names)
                    }
                }
                "del" => {
                    self.advance();
                    let mut targets = vec![self.expr()?];
                    while self.eat_op(",") {
                        if self.at_statement_end() {
                            break;
                        }
                        targets.push(self.expr()?);
                    }
                    StmtKind::Delete(targets)
                }
                "assert" => {
                    self.advance();
                    let test = self.test()?;
                    let msg = if self.eat_op(",") { Some(self.test()?) } else { None };
                    StmtKind::Assert(test, msg)
                }
                "import" => {
                    self.advance();
                    let mut names = Vec::new();
                    loop {
                        let module = self.dotted_name()?;
                        let alias = if self.eat_keyword("as") { Some(self.expect_name()?.0) } else { None };
                        names.push((module, alias));
                        if !self.eat_op(",") {
                            break;
                        }
                    }
                    StmtKind::Import(names)
                }
                "from" => {
                    self.advance();
                    let mut module = String::new();
                    while self.at_op(".") || self.at_op("...") {
                        if let TokenKind::Op(o) = self.advance().kind {
                            module.push_str(o);
                        }
                    }
                    if !self.at_keyword("import") {
                        module.push_str(&self.dotted_name()?);
                    }
                    self.expect_keyword("import")?;
                    let mut names = Vec::new();
                    if self.eat_op("*") {
                        names.push(("*".to_string(), None));
                    } else {
                        let paren = self.eat_op("(");
                        loop {
                            if paren && self.at_op(")") {
                                break;
                            }
                            let (name, _) = self.expect_name()?;
                            let alias = if self.eat_keyword("as") { Some(self.expect_name()?.0) } else { None };
                            names.push((name, alias));
                            if !self.eat_op(",") {
                                break;
                            }
                        }
                        if paren {
                            self.expect_op(")")?;
                        }
                    }
                    StmtKind::ImportFrom { module, names }
                }
                _ => self.expression_statement()?,
            },
            _ => self.expression_statement()?,
        };
        Ok(Stmt {
            kind,
            span: self.span_from(start),
        })
    }

    fn at_statement_end(&self) -> bool {
        self.at(&TokenKind::Newline) || self.at(&TokenKind::EndMarker) || self.at_op(";")
    }

    fn dotted_name(&mut self) -> Result<String, ParseError> {
        let mut name = self.expect_name()?.0;
        while self.eat_op(".") {
            name.push('.');
            name.push_str(&self.expect_name()?.0);
        }
        Ok(name)
    }

    fn expression_statement(&mut self) -> Result<StmtKind, ParseError> {
        let first = self.testlist_star()?;
        if let TokenKind::Op(op) = self.peek().kind {
            if op.len() >= 2 && op.ends_with('=') && !matches!(op, "==" | "<=" | ">=" | "!=") {
                let bin = BinOp::from_symbol(&op[..op.len() - 1]).ok_or_else(|| self.unexpected())?;
                self.advance();
                let value = if self.at_keyword("yield") { self.yield_expr()? } else { self.testlist_star()? };
                return Ok(StmtKind::AugAssign {
                    target: first,
                    op: bin,
                    value,
                });
            }
        }
        if self.eat_op(":") {
            let annotation = self.test()?;
            let value = if self.eat_op("=") { Some(self.testlist_star()?) } else { None };
            return Ok(StmtKind::AnnAssign {
                target: first,
                annotation,
                value,
            });
        }
        if self.at_op("=") {
            let mut exprs = vec![first];
            while self.eat_op("=") {
                let e = if self.at_keyword("yield") { self.yield_expr()? } else { self.testlist_star()? };
                exprs.push(e);
            }
            let value = exprs.pop().expect("at least two expressions");
            return Ok(StmtKind::Assign { targets: exprs, value });
        }
        Ok(StmtKind::Expr(first))
    }

    // ----- expressions ------------------------------------------------------

    fn make(&self, kind: ExprKind, start: Span) -> Expr {
        Expr {
            kind,
            span: self.span_from(start),
        }
    }

    /// `a, b = ...` style target lists (parsed at bitwise-or level so that
    /// `in` terminates them).
    fn target_list(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(self.peek());
        let first = self.star_or(Self::expr)?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_keyword("in") || self.at_op("=") {
                break;
            }
            items.push(self.star_or(Self::expr)?);
        }
        Ok(self.make(ExprKind::Tuple(items), start))
    }

    fn star_or(&mut self, f: fn(&mut Self) -> Result<Expr, ParseError>) -> Result<Expr, ParseError> {
        if self.at_op("*") {
            let start = span_of(&self.advance());
            let inner = self.expr()?;
            Ok(self.make(ExprKind::Starred(Box::new(inner)), start))
        } else {
            f(self)
        }
    }

    fn testlist_star(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(self.peek());
        let first = self.star_or(Self::named_test)?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_statement_end() || self.at_op("=") || self.at_op(")") || self.at_op(":") || self.is_augassign() {
                break;
            }
            items.push(self.star_or(Self::named_test)?);
        }
        Ok(self.make(ExprKind::Tuple(items), start))
    }

    fn is_augassign(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Op(op) if op.len() >= 2 && op.ends_with('=') && !matches!(op, "==" | "<=" | ">=" | "!="))
    }

    fn named_test(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek().kind, TokenKind::Name(_)) && matches!(self.peek_nth(1).kind, TokenKind::Op(":=")) {
            let start = span_of(self.peek());
            let (name, tok) = self.expect_name()?;
            let target = Expr {
                kind: ExprKind::Name(name),
                span: span_of(&tok),
            };
            self.advance();
            let value = self.test()?;
            return Ok(self.make(
                ExprKind::NamedExpr {
                    target: Box::new(target),
                    value: Box::new(value),
                },
                start,
            ));
        }
        self.test()
    }

    fn test(&mut self) -> Result<Expr, ParseError> {
        if self.at_keyword("lambda") {
            return self.lambda();
        }
        let start = span_of(self.peek());
        let body = self.or_test()?;
        if self.at_keyword("if") {
            // Conditional expression; `else` is mandatory.
            self.advance();
            let test = self.or_test()?;
            self.expect_keyword("else")?;
            let orelse = self.test()?;
            return Ok(self.make(
                ExprKind::IfExp {
                    test: Box::new(test),
                    body: Box::new(body),
                    orelse: Box::new(orelse),
                },
                start,
            ));
        }
        Ok(body)
    }

    fn lambda(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(&self.expect_keyword("lambda")?);
        let params = self.params(":", false)?;
        self.expect_op(":")?;
        let body = self.test()?;
        Ok(self.make(
            ExprKind::Lambda {
                params,
                body: Box::new(body),
            },
            start,
        ))
    }

    fn or_test(&mut self) -> Result<Expr, ParseError> {
        self.bool_chain("or", BoolOp::Or, Self::and_test)
    }

    fn and_test(&mut self) -> Result<Expr, ParseError> {
        self.bool_chain("and", BoolOp::And, Self::not_test)
    }

    fn bool_chain(
        &mut self,
        kw: &str,
        op: BoolOp,
        next: fn(&mut Self) -> Result<Expr, ParseError>,
    ) -> Result<Expr, ParseError> {
        let start = span_of(self.peek());
        let first = next(self)?;
        if !self.at_keyword(kw) {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_keyword(kw) {
            values.push(next(self)?);
        }
        Ok(self.make(ExprKind::BoolOp { op, values }, start))
    }

    fn not_test(&mut self) -> Result<Expr, ParseError> {
        if self.at_keyword("not") {
            let start = span_of(&self.advance());
            let operand = self.not_test()?;
            return Ok(self.make(
                ExprKind::UnaryOp {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                },
                start,
            ));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(self.peek());
        let left = self.expr()?;
        let mut ops = Vec::new();
        let mut comparators = Vec::new();
        loop {
            let op = match &self.peek().kind {
                TokenKind::Op("==") => CmpOp::Eq,
                TokenKind::Op("!=") => CmpOp::NotEq,
                TokenKind::Op("<") => CmpOp::Lt,
                TokenKind::Op("<=") => CmpOp::LtE,
                TokenKind::Op(">") => CmpOp::Gt,
                TokenKind::Op(">=") => CmpOp::GtE,
                TokenKind::Name(n) if n == "in" => CmpOp::In,
                TokenKind::Name(n) if n == "not" && matches!(&self.peek_nth(1).kind, TokenKind::Name(m) if m == "in") => {
                    self.advance();
                    CmpOp::NotIn
                }
                TokenKind::Name(n) if n == "is" => {
                    if matches!(&self.peek_nth(1).kind, TokenKind::Name(m) if m == "not") {
                        self.advance();
                        CmpOp::IsNot
                    } else {
                        CmpOp::Is
                    }
                }
                _ => break,
            };
            self.advance();
            ops.push(op);
            comparators.push(self.expr()?);
        }
        if ops.is_empty() {
            return Ok(left);
        }
        Ok(self.make(
            ExprKind::Compare {
                left: Box::new(left),
                ops,
                comparators,
            },
            start,
        ))
    }

    fn binary_level(
        &mut self,
        ops: &[&str],
        next: fn(&mut Self) -> Result<Expr, ParseError>,
    ) -> Result<Expr, ParseError> {
        let start = span_of(self.peek());
        let mut left = next(self)?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Op(o) if ops.contains(&o) => o,
                _ => break,
            };
            self.advance();
            let right = next(self)?;
            left = self.make(
                ExprKind::BinOp {
                    left: Box::new(left),
                    op: BinOp::from_symbol(op).expect("binary operator"),
                    right: Box::new(right),
                },
                start,
            );
        }
        Ok(left)
    }

    /// Bitwise-or level (`expr` in the reference grammar).
    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["|"], Self::xor_expr)
    }

    fn xor_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["^"], Self::and_expr)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["&"], Self::shift_expr)
    }

    fn shift_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["<<", ">>"], Self::arith_expr)
    }

    fn arith_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["+", "-"], Self::term)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["*", "/", "%", "//", "@"], Self::factor)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let op = match self.peek().kind {
            TokenKind::Op("-") => Some(UnaryOp::Neg),
            TokenKind::Op("+") => Some(UnaryOp::Pos),
            TokenKind::Op("~") => Some(UnaryOp::Invert),
            _ => None,
        };
        if let Some(op) = op {
            let start = span_of(&self.advance());
            let operand = self.factor()?;
            return Ok(self.make(
                ExprKind::UnaryOp {
                    op,
                    operand: Box::new(operand),
                },
                start,
            ));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(self.peek());
        let base = if self.at_keyword("await") {
            self.advance();
            let inner = self.primary()?;
            self.make(ExprKind::Await(Box::new(inner)), start)
        } else {
            self.primary()?
        };
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(self.make(
                ExprKind::BinOp {
                    left: Box::new(base),
                    op: BinOp::Pow,
                    right: Box::new(exp),
                },
                start,
            ));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(self.peek());
        let mut e = self.atom()?;
        loop {
            if self.eat_op("(") {
                let (args, keywords) = self.arguments()?;
                self.expect_op(")")?;
                e = self.make(
                    ExprKind::Call {
                        func: Box::new(e),
                        args,
                        keywords,
                    },
                    start,
                );
            } else if self.eat_op("[") {
                let index = self.subscript_list()?;
                self.expect_op("]")?;
                e = self.make(
                    ExprKind::Subscript {
                        value: Box::new(e),
                        index: Box::new(index),
                    },
                    start,
                );
            } else if self.eat_op(".") {
                let (attr, _) = match &self.peek().kind {
                    // Attribute names may be keywords in some positions; accept any name.
                    TokenKind::Name(n) => {
                        let n = n.clone();
                        (n, self.advance())
                    }
                    _ => return Err(self.error("expected attribute name")),
                };
                e = self.make(
                    ExprKind::Attribute {
                        value: Box::new(e),
                        attr,
                    },
                    start,
                );
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn arguments(&mut self) -> Result<(Vec<Expr>, Vec<Keyword>), ParseError> {
        let mut args = Vec::new();
        let mut keywords = Vec::new();
        while !self.at_op(")") {
            if self.at_op("*") {
                let start = span_of(&self.advance());
                let inner = self.test()?;
                args.push(self.make(ExprKind::Starred(Box::new(inner)), start));
            } else if self.eat_op("**") {
                let value = self.test()?;
                keywords.push(Keyword { name: None, value });
            } else if matches!(self.peek().kind, TokenKind::Name(_)) && matches!(self.peek_nth(1).kind, TokenKind::Op("=")) {
                let (name, _) = self.expect_name()?;
                self.advance();
                let value = self.test()?;
                keywords.push(Keyword {
                    name: Some(name),
                    value,
                });
            } else {
                let start = span_of(self.peek());
                let value = self.named_test()?;
                if self.at_keyword("for") || self.at_keyword("async") {
                    let generators = self.comp_for()?;
                    args.push(self.make(
                        ExprKind::Comprehension {
                            kind: CompKind::Generator,
                            elt: Box::new(value),
                            value: None,
                            generators,
                        },
                        start,
                    ));
                } else {
                    args.push(value);
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok((args, keywords))
    }

    fn subscript_list(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(self.peek());
        let first = self.subscript()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.subscript()?);
        }
        Ok(self.make(ExprKind::Tuple(items), start))
    }

    fn subscript(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(self.peek());
        let lower = if self.at_op(":") { None } else { Some(Box::new(self.named_test()?)) };
        if !self.at_op(":") {
            return Ok(*lower.expect("non-slice subscript has an expression"));
        }
        self.advance();
        let upper = if self.at_op(":") || self.at_op("]") || self.at_op(",") {
            None
        } else {
            Some(Box::new(self.test()?))
        };
        let step = if self.eat_op(":") && !(self.at_op("]") || self.at_op(",")) {
            Some(Box::new(self.test()?))
        } else {
            None
        };
        Ok(self.make(ExprKind::Slice { lower, upper, step }, start))
    }

    fn comp_for(&mut self) -> Result<Vec<CompFor>, ParseError> {
        let mut generators = Vec::new();
        while self.at_keyword("for") || self.at_keyword("async") {
            self.eat_keyword("async");
            self.expect_keyword("for")?;
            let target = self.target_list()?;
            self.expect_keyword("in")?;
            let iter = self.or_test()?;
            let mut ifs = Vec::new();
            while self.eat_keyword("if") {
                ifs.push(self.or_test()?);
            }
            generators.push(CompFor { target, iter, ifs });
        }
        Ok(generators)
    }

    fn yield_expr(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(&self.expect_keyword("yield")?);
        if self.eat_keyword("from") {
            let inner = self.test()?;
            return Ok(self.make(ExprKind::YieldFrom(Box::new(inner)), start));
        }
        if self.at_statement_end() || self.at_op(")") || self.at_op("=") {
            return Ok(self.make(ExprKind::Yield(None), start));
        }
        let value = self.testlist_star()?;
        Ok(self.make(ExprKind::Yield(Some(Box::new(value))), start))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        let start = span_of(&tok);
        match &tok.kind {
            TokenKind::Name(n) => {
                let kind = match n.as_str() {
                    "True" => ExprKind::Constant(Constant::True),
                    "False" => ExprKind::Constant(Constant::False),
                    "None" => ExprKind::Constant(Constant::None),
                    "yield" => return self.yield_expr(),
                    kw if KEYWORDS.contains(&kw) => return Err(self.unexpected()),
                    _ => ExprKind::Name(n.clone()),
                };
                self.advance();
                Ok(self.make(kind, start))
            }
            TokenKind::Number(n) => {
                let n = n.clone();
                self.advance();
                Ok(self.make(ExprKind::Constant(Constant::Number(n)), start))
            }
            TokenKind::Str(_) => {
                let mut text = String::new();
                while let TokenKind::Str(s) = &self.peek().kind {
                    text.push_str(s);
                    self.advance();
                }
                Ok(self.make(ExprKind::Constant(Constant::Str(text)), start))
            }
            TokenKind::Op("...") => {
                self.advance();
                Ok(self.make(ExprKind::Constant(Constant::Ellipsis), start))
            }
            TokenKind::Op("(") => self.paren_atom(),
            TokenKind::Op("[") => self.list_atom(),
            TokenKind::Op("{") => self.brace_atom(),
            _ => Err(self.unexpected()),
        }
    }

    fn paren_atom(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(&self.expect_op("(")?);
        if self.eat_op(")") {
            return Ok(self.make(ExprKind::Tuple(vec![]), start));
        }
        if self.at_keyword("yield") {
            let mut inner = self.yield_expr()?;
            self.expect_op(")")?;
            inner.span = self.span_from(start);
            return Ok(inner);
        }
        let first = self.star_or(Self::named_test)?;
        if self.at_keyword("for") || self.at_keyword("async") {
            let generators = self.comp_for()?;
            self.expect_op(")")?;
            return Ok(self.make(
                ExprKind::Comprehension {
                    kind: CompKind::Generator,
                    elt: Box::new(first),
                    value: None,
                    generators,
                },
                start,
            ));
        }
        if self.eat_op(")") {
            // Parenthesized expression: keep the node, widen its span.
            let mut inner = first;
            inner.span = self.span_from(start);
            return Ok(inner);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op(")") {
                break;
            }
            items.push(self.star_or(Self::named_test)?);
        }
        self.expect_op(")")?;
        Ok(self.make(ExprKind::Tuple(items), start))
    }

    fn list_atom(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(&self.expect_op("[")?);
        if self.eat_op("]") {
            return Ok(self.make(ExprKind::List(vec![]), start));
        }
        let first = self.star_or(Self::named_test)?;
        if self.at_keyword("for") || self.at_keyword("async") {
            let generators = self.comp_for()?;
            self.expect_op("]")?;
            return Ok(self.make(
                ExprKind::Comprehension {
                    kind: CompKind::List,
                    elt: Box::new(first),
                    value: None,
                    generators,
                },
                start,
            ));
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.star_or(Self::named_test)?);
        }
        self.expect_op("]")?;
        Ok(self.make(ExprKind::List(items), start))
    }

    fn brace_atom(&mut self) -> Result<Expr, ParseError> {
        let start = span_of(&self.expect_op("{")?);
        if self.eat_op("}") {
            return Ok(self.make(ExprKind::Dict(vec![]), start));
        }
        // Dict (or dict comprehension) when the first item is `k: v` or `**m`.
        let first_key = if self.eat_op("**") { None } else { Some(self.star_or(Self::named_test)?) };
        if first_key.is_none() || self.at_op(":") {
            let first_value = if first_key.is_none() {
                self.expr()?
            } else {
                self.expect_op(":")?;
                self.test()?
            };
            if first_key.is_some() && (self.at_keyword("for") || self.at_keyword("async")) {
                let generators = self.comp_for()?;
                self.expect_op("}")?;
                return Ok(self.make(
                    ExprKind::Comprehension {
                        kind: CompKind::Dict,
                        elt: Box::new(first_key.expect("checked")),
                        value: Some(Box::new(first_value)),
                        generators,
                    },
                    start,
                ));
            }
            let mut pairs = vec![(first_key, first_value)];
            while self.eat_op(",") {
                if self.at_op("}") {
                    break;
                }
                if self.eat_op("**") {
                    pairs.push((None, self.expr()?));
                } else {
                    let k = self.test()?;
                    self.expect_op(":")?;
                    let v = self.test()?;
                    pairs.push((Some(k), v));
                }
            }
            self.expect_op("}")?;
            return Ok(self.make(ExprKind::Dict(pairs), start));
        }
        let first = first_key.expect("set item");
        if self.at_keyword("for") || self.at_keyword("async") {
            let generators = self.comp_for()?;
            self.expect_op("}")?;
            return Ok(self.make(
                ExprKind::Comprehension {
                    kind: CompKind::Set,
                    elt: Box::new(first),
                    value: None,
                    generators,
                },
                start,
            ));
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            items.push(self.star_or(Self::named_test)?);
        }
        self.expect_op("}")?;
        Ok(self.make(ExprKind::Set(items), start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Module {
        parse_module(src).unwrap_or_else(|e| panic!("{src:?}: {e:?}"))
    }

    #[test]
    fn function_with_loop_and_condition() {
        let m = parse("def even_filter(numbers):\n    evens = []\n    for num in numbers:\n        if num % 2 == 0:\n            evens.append(num)\n    return evens\n");
        let StmtKind::FunctionDef { body, .. } = &m.body[0].kind else { panic!() };
        assert_eq!(body.len(), 3);
        let for_stmt = &body[1];
        assert_eq!(for_stmt.span.line, 3);
        assert_eq!(for_stmt.span.end_line, 5);
        assert!(for_stmt.kind.is_loop());
    }

    #[test]
    fn expression_spans_are_verbatim() {
        let src = "x = foo(a,  b)[0].bar\n";
        let m = parse(src);
        let StmtKind::Assign { value, .. } = &m.body[0].kind else { panic!() };
        assert_eq!(&src[value.span.start..value.span.end], "foo(a,  b)[0].bar");
    }

    #[test]
    fn parenthesized_spans_include_parens() {
        let src = "y = (a +\n     b)\n";
        let m = parse(src);
        let StmtKind::Assign { value, .. } = &m.body[0].kind else { panic!() };
        assert_eq!(&src[value.span.start..value.span.end], "(a +\n     b)");
    }

    #[test]
    fn comparison_chains_and_membership() {
        let e = parse_expression("a < b <= c not in d is not e").unwrap();
        let ExprKind::Compare { ops, .. } = e.kind else { panic!() };
        assert_eq!(ops, vec![CmpOp::Lt, CmpOp::LtE, CmpOp::NotIn, CmpOp::IsNot]);
    }

    #[test]
    fn lambda_and_comprehensions() {
        for src in [
            "lambda a, b: a + b",
            "[x * 2 for x in xs if x]",
            "{k: list(v) for k, v in pairs}",
            "{x for x in xs}",
            "sum(x for x in xs)",
            "f(*args, key=len, **kw)",
            "xs[1:2, ::3]",
            "a if b else c",
            "not a or b and c",
            "-x ** 2",
        ] {
            parse_expression(src).unwrap_or_else(|e| panic!("{src}: {e:?}"));
        }
    }

    #[test]
    fn free_names_respect_binders() {
        let e = parse_expression("[y + z for y in ys] + (lambda q: q + w)(1)").unwrap();
        assert_eq!(e.free_names(), vec!["ys", "z", "w"]);
    }

    #[test]
    fn opaque_compound_statements() {
        let m = parse("class A(B):\n    def f(self):\n        pass\ntry:\n    x = 1\nexcept ValueError as e:\n    x = 2\nfinally:\n    pass\nwith open(p) as fh:\n    data = fh.read()\n");
        assert_eq!(m.body.len(), 3);
        let StmtKind::Opaque { bodies, .. } = &m.body[1].kind else { panic!() };
        assert_eq!(bodies.len(), 3);
    }

    #[test]
    fn imports_and_decorators() {
        let m = parse("from __future__ import annotations\nimport os.path as p, sys\nfrom . import (a, b as c,)\n@dec(1)\ndef f(x, *, y=2, **kw) -> int:\n    return x\n");
        assert_eq!(m.body.len(), 4);
    }

    #[test]
    fn statements_on_one_line() {
        let m = parse("for x in xs: out.append(x); n += 1\n");
        let StmtKind::For { body, .. } = &m.body[0].kind else { panic!() };
        assert_eq!(body.len(), 2);
    }

    #[test]
    fn malformed_header_is_rejected() {
        let err = parse_module("def f(:\n    pass\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn augmented_and_annotated_assignment() {
        let m = parse("total += n * 2\ncount: int = 0\na = b = 1\n");
        assert!(matches!(m.body[0].kind, StmtKind::AugAssign { op: BinOp::Add, .. }));
        assert!(matches!(m.body[1].kind, StmtKind::AnnAssign { .. }));
        let StmtKind::Assign { targets, .. } = &m.body[2].kind else { panic!() };
        assert_eq!(targets.len(), 2);
    }
}
