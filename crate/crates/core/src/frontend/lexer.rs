//! Tokenizer for the supported Python subset.
//!
//! Produces a flat token stream with explicit `Newline`, `Indent` and
//! `Dedent` tokens, following the layout rules of the reference tokenizer:
//! blank and comment-only lines are invisible, newlines inside brackets are
//! implicit joins, and a backslash at end of line continues the logical line.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Name(String),
    Number(String),
    Str(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    EndMarker,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Name(n) => write!(f, "name `{n}`"),
            TokenKind::Number(n) => write!(f, "number `{n}`"),
            TokenKind::Str(_) => f.write_str("string literal"),
            TokenKind::Op(op) => write!(f, "`{op}`"),
            TokenKind::Newline => f.write_str("newline"),
            TokenKind::Indent => f.write_str("indent"),
            TokenKind::Dedent => f.write_str("dedent"),
            TokenKind::EndMarker => f.write_str("end of file"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offset of the first byte.
    pub start: usize,
    /// Byte offset one past the last byte.
    pub end: usize,
    pub line: usize,
    pub col: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "=",
];

const STRING_PREFIXES: &[&str] = &[
    "r", "u", "b", "f", "br", "rb", "fr", "rf", "R", "U", "B", "F", "Br", "bR", "BR", "Rb", "rB",
    "RB", "Fr", "fR", "FR", "Rf", "rF", "RF",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        line: 1,
        line_start: 0,
        tokens: Vec::new(),
        indents: vec![0],
        brackets: Vec::new(),
        at_line_start: true,
    };
    lexer.run()?;
    Ok(lexer.tokens)
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
    tokens: Vec<Token>,
    indents: Vec<usize>,
    /// Open brackets with their line and column.
    brackets: Vec<(u8, usize, usize)>,
    at_line_start: bool,
}

impl<'a> Lexer<'a> {
    fn error(&self, message: impl Into<String>) -> LexError {
        LexError {
            message: message.into(),
            line: self.line,
            col: self.pos - self.line_start + 1,
        }
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: usize, col: usize) {
        self.tokens.push(Token {
            kind,
            start,
            end: self.pos,
            line,
            col,
            end_line: self.line,
        });
    }

    fn newline_here(&mut self) {
        self.line += 1;
        self.line_start = self.pos;
    }

    fn run(&mut self) -> Result<(), LexError> {
        loop {
            if self.at_line_start && self.brackets.is_empty() {
                if !self.indentation()? {
                    break;
                }
                continue;
            }
            let Some(c) = self.peek_at(0) else { break };
            match c {
                b' ' | b'\t' | b'\x0c' => self.pos += 1,
                b'#' => self.skip_comment(),
                b'\r' | b'\n' => {
                    let start = self.pos;
                    let (line, col) = (self.line, self.pos - self.line_start + 1);
                    self.consume_line_break();
                    if self.brackets.is_empty() {
                        self.tokens.push(Token {
                            kind: TokenKind::Newline,
                            start,
                            end: start,
                            line,
                            col,
                            end_line: line,
                        });
                        self.at_line_start = true;
                    }
                    self.newline_here();
                }
                b'\\' => {
                    self.pos += 1;
                    match self.peek_at(0) {
                        Some(b'\n') | Some(b'\r') => {
                            self.consume_line_break();
                            self.newline_here();
                        }
                        _ => return Err(self.error("unexpected character after line continuation")),
                    }
                }
                b'\'' | b'"' => self.string(self.pos)?,
                b'0'..=b'9' => self.number(),
                b'.' if matches!(self.peek_at(1), Some(b'0'..=b'9')) => self.number(),
                _ if is_ident_start(self.current_char()) => self.name()?,
                _ => self.operator()?,
            }
        }
        if let Some(&(open, line, col)) = self.brackets.last() {
            return Err(LexError {
                message: format!("`{}` was never closed", open as char),
                line,
                col,
            });
        }
        let needs_newline = matches!(
            self.tokens.last(),
            Some(t) if !matches!(t.kind, TokenKind::Newline | TokenKind::Dedent | TokenKind::Indent)
        );
        if needs_newline {
            self.push(TokenKind::Newline, self.pos, self.line, self.pos - self.line_start + 1);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(TokenKind::Dedent, self.pos, self.line, 1);
        }
        self.push(TokenKind::EndMarker, self.pos, self.line, 1);
        Ok(())
    }

    /// Measures the indentation of a fresh logical line. Returns false at EOF.
    fn indentation(&mut self) -> Result<bool, LexError> {
        let mut width = 0usize;
        let mut p = self.pos;
        while let Some(&b) = self.bytes.get(p) {
            match b {
                b' ' => width += 1,
                b'\t' => width = (width / 8 + 1) * 8,
                b'\x0c' => width = 0,
                _ => break,
            }
            p += 1;
        }
        self.pos = p;
        match self.peek_at(0) {
            None => return Ok(false),
            Some(b'#') => {
                self.skip_comment();
                if self.peek_at(0).is_some() {
                    self.consume_line_break();
                    self.newline_here();
                }
                return Ok(true);
            }
            Some(b'\r') | Some(b'\n') => {
                self.consume_line_break();
                self.newline_here();
                return Ok(true);
            }
            _ => {}
        }
        self.at_line_start = false;
        let current = *self.indents.last().unwrap_or(&0);
        let col = self.pos - self.line_start + 1;
        if width > current {
            self.indents.push(width);
            self.push(TokenKind::Indent, self.pos, self.line, col);
        } else if width < current {
            while width < *self.indents.last().unwrap_or(&0) {
                self.indents.pop();
                self.push(TokenKind::Dedent, self.pos, self.line, col);
            }
            if *self.indents.last().unwrap_or(&0) != width {
                return Err(self.error("unindent does not match any outer indentation level"));
            }
        }
        Ok(true)
    }

    fn current_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or('\0')
    }

    fn skip_comment(&mut self) {
        while let Some(b) = self.peek_at(0) {
            if b == b'\n' || b == b'\r' {
                break;
            }
            self.pos += 1;
        }
    }

    fn consume_line_break(&mut self) {
        if self.peek_at(0) == Some(b'\r') {
            self.pos += 1;
        }
        if self.peek_at(0) == Some(b'\n') {
            self.pos += 1;
        }
    }

    fn name(&mut self) -> Result<(), LexError> {
        let start = self.pos;
        let (line, col) = (self.line, self.pos - self.line_start + 1);
        while self.pos < self.bytes.len() && is_ident_continue(self.current_char()) {
            self.pos += self.current_char().len_utf8();
        }
        let word = &self.src[start..self.pos];
        if STRING_PREFIXES.contains(&word) && matches!(self.peek_at(0), Some(b'\'') | Some(b'"')) {
            return self.string(start);
        }
        self.push(TokenKind::Name(word.to_string()), start, line, col);
        Ok(())
    }

    /// Lexes a string literal whose prefix (if any) begins at `start`; `self.pos`
    /// sits on the opening quote.
    fn string(&mut self, start: usize) -> Result<(), LexError> {
        let line = self.line;
        let col = start - self.line_start + 1;
        let quote = self.bytes[self.pos];
        let triple = self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote);
        self.pos += if triple { 3 } else { 1 };
        loop {
            let Some(b) = self.peek_at(0) else {
                return Err(LexError {
                    message: "unterminated string literal".into(),
                    line,
                    col,
                });
            };
            match b {
                b'\\' => {
                    self.pos += 1;
                    match self.peek_at(0) {
                        Some(b'\r') | Some(b'\n') => {
                            self.consume_line_break();
                            self.newline_here();
                        }
                        Some(_) => self.pos += self.current_char().len_utf8(),
                        None => {}
                    }
                }
                b'\r' | b'\n' => {
                    if !triple {
                        return Err(LexError {
                            message: "unterminated string literal".into(),
                            line,
                            col,
                        });
                    }
                    self.consume_line_break();
                    self.newline_here();
                }
                _ if b == quote => {
                    if !triple {
                        self.pos += 1;
                        break;
                    }
                    if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                        self.pos += 3;
                        break;
                    }
                    self.pos += 1;
                }
                _ => self.pos += self.current_char().len_utf8(),
            }
        }
        let text = self.src[start..self.pos].to_string();
        self.push(TokenKind::Str(text), start, line, col);
        Ok(())
    }

    fn digits(&mut self, accept: fn(u8) -> bool) {
        while let Some(b) = self.peek_at(0) {
            if accept(b) || b == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) {
        let start = self.pos;
        let (line, col) = (self.line, self.pos - self.line_start + 1);
        let radix = match (self.peek_at(0), self.peek_at(1)) {
            (Some(b'0'), Some(b'x' | b'X')) => Some((|b: u8| b.is_ascii_hexdigit()) as fn(u8) -> bool),
            (Some(b'0'), Some(b'o' | b'O')) => Some((|b: u8| (b'0'..=b'7').contains(&b)) as fn(u8) -> bool),
            (Some(b'0'), Some(b'b' | b'B')) => Some((|b: u8| b == b'0' || b == b'1') as fn(u8) -> bool),
            _ => None,
        };
        if let Some(accept) = radix {
            self.pos += 2;
            self.digits(accept);
        } else {
            self.digits(|b: u8| b.is_ascii_digit());
            if self.peek_at(0) == Some(b'.') && self.peek_at(1) != Some(b'.') {
                let after = self.peek_at(1).map(char::from);
                let ident_follows = after.is_some_and(|c| is_ident_start(c) && c != 'e' && c != 'E' && c != 'j' && c != 'J');
                if !ident_follows {
                    self.pos += 1;
                    self.digits(|b: u8| b.is_ascii_digit());
                }
            }
            if matches!(self.peek_at(0), Some(b'e' | b'E'))
                && (matches!(self.peek_at(1), Some(b'0'..=b'9'))
                    || (matches!(self.peek_at(1), Some(b'+' | b'-')) && matches!(self.peek_at(2), Some(b'0'..=b'9'))))
            {
                self.pos += 2;
                self.digits(|b: u8| b.is_ascii_digit());
            }
            if matches!(self.peek_at(0), Some(b'j' | b'J')) {
                self.pos += 1;
            }
        }
        let text = self.src[start..self.pos].to_string();
        self.push(TokenKind::Number(text), start, line, col);
    }

    fn operator(&mut self) -> Result<(), LexError> {
        let rest = &self.src[self.pos..];
        let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) else {
            return Err(self.error(format!("unexpected character `{}`", self.current_char())));
        };
        let start = self.pos;
        let (line, col) = (self.line, self.pos - self.line_start + 1);
        match *op {
            "(" | "[" | "{" => self.brackets.push((op.as_bytes()[0], line, col)),
            ")" | "]" | "}" => {
                let open = match *op {
                    ")" => b'(',
                    "]" => b'[',
                    _ => b'{',
                };
                if self.brackets.pop().map(|b| b.0) != Some(open) {
                    return Err(self.error(format!("unmatched `{op}`")));
                }
            }
            _ => {}
        }
        self.pos += op.len();
        self.push(TokenKind::Op(op), start, line, col);
        Ok(())
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn indentation_produces_indent_and_dedent() {
        let toks = kinds("for x in xs:\n    y = x\nz = 1\n");
        assert!(toks.contains(&TokenKind::Indent));
        assert!(toks.contains(&TokenKind::Dedent));
        assert_eq!(toks.last(), Some(&TokenKind::EndMarker));
    }

    #[test]
    fn brackets_join_lines() {
        let toks = kinds("x = (1 +\n     2)\n");
        let newlines = toks.iter().filter(|k| **k == TokenKind::Newline).count();
        assert_eq!(newlines, 1);
    }

    #[test]
    fn comments_and_blank_lines_are_invisible() {
        let toks = kinds("x = 1\n\n    # indented comment\ny = 2\n");
        assert!(!toks.contains(&TokenKind::Indent));
    }

    #[test]
    fn string_prefixes_and_triple_quotes() {
        let toks = kinds("s = rb'a\\'b'\nt = \"\"\"multi\nline\"\"\"\n");
        let strs: Vec<_> = toks.iter().filter(|k| matches!(k, TokenKind::Str(_))).collect();
        assert_eq!(strs.len(), 2);
    }

    #[test]
    fn numbers() {
        let toks = kinds("a = 0x1F + 1_000 + 3.5e-2 + .5 + 2j\n");
        let nums: Vec<_> = toks
            .iter()
            .filter_map(|k| match k {
                TokenKind::Number(n) => Some(n.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(nums, ["0x1F", "1_000", "3.5e-2", ".5", "2j"]);
    }

    #[test]
    fn bad_dedent_is_an_error() {
        let err = tokenize("if x:\n        a = 1\n    b = 2\n").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn unterminated_string_is_an_error() {
        assert!(tokenize("x = 'abc\n").is_err());
    }

    #[test]
    fn no_trailing_newline() {
        let toks = kinds("x = 1");
        assert_eq!(toks[toks.len() - 2], TokenKind::Newline);
    }
}
