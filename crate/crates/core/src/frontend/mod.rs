//! Parsing and loop-fragment extraction.

pub mod ast;
pub mod extract;
pub mod flow;
pub mod json;
pub mod lexer;
pub mod parser;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use extract::{
    extract_fragments, FragmentContext, InitState, LoopFragment, LoopKind, OperationKind, OperationRecord, SortSpec,
};
pub use json::{from_extraction_json, to_extraction_json, DatasetField, Datasets, ExtractionRecord, OperationEntry};

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("{}: no such file", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: syntax error: {message}\n    {text}", path.display())]
    Syntax {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
        /// The offending source line, without its line terminator.
        text: String,
    },
}

/// A parsed input program.
#[derive(Debug, Clone)]
pub struct SourceProgram {
    pub path: PathBuf,
    pub text: String,
    /// Lines including their terminators; `lines.concat() == text`.
    pub lines: Vec<String>,
    pub module: ast::Module,
}

impl SourceProgram {
    pub fn from_source(path: impl Into<PathBuf>, text: impl Into<String>) -> Result<Self, FrontendError> {
        let path = path.into();
        let text = text.into();
        let lines: Vec<String> = text.split_inclusive('\n').map(str::to_string).collect();
        let module = parser::parse_module(&text).map_err(|e| FrontendError::Syntax {
            line: e.line,
            column: e.col,
            message: e.message,
            text: lines
                .get(e.line.saturating_sub(1))
                .map(|l| l.trim_end_matches(['\n', '\r']).to_string())
                .unwrap_or_default(),
            path: path.clone(),
        })?;
        Ok(SourceProgram {
            path,
            text,
            lines,
            module,
        })
    }

    /// 1-based line lookup, without the terminator.
    pub fn line(&self, n: usize) -> Option<&str> {
        self.lines
            .get(n.checked_sub(1)?)
            .map(|l| l.trim_end_matches(['\n', '\r']))
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn slice(&self, span: ast::Span) -> &str {
        &self.text[span.start..span.end]
    }

    /// Leading whitespace of a 1-based line.
    pub fn indent_of(&self, n: usize) -> &str {
        let line = self.line(n).unwrap_or("");
        &line[..line.len() - line.trim_start_matches([' ', '\t']).len()]
    }

    /// File name used for sandbox copies and the application name.
    pub fn file_name(&self) -> String {
        self.path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "program.py".to_string())
    }
}

pub fn parse_program(path: &Path) -> Result<SourceProgram, FrontendError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(FrontendError::FileNotFound(path.into())),
        Err(source) => {
            return Err(FrontendError::Io {
                path: path.into(),
                source,
            })
        }
    };
    SourceProgram::from_source(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_round_trip() {
        for text in ["", "a = 1", "a = 1\n", "a = 1\r\nb = 2\r\n", "\n\nx = 3\n"] {
            let p = SourceProgram::from_source("t.py", text).unwrap();
            assert_eq!(p.lines.concat(), text);
        }
        assert_eq!(SourceProgram::from_source("t.py", "").unwrap().line_count(), 0);
    }

    #[test]
    fn syntax_error_carries_position_and_text() {
        let err = SourceProgram::from_source("bad.py", "def f(:\n    pass\n").unwrap_err();
        match err {
            FrontendError::Syntax { line, text, .. } => {
                assert_eq!(line, 1);
                assert_eq!(text, "def f(:");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        let err = parse_program(Path::new("/definitely/not/here.py")).unwrap_err();
        assert!(matches!(err, FrontendError::FileNotFound(_)));
    }
}
