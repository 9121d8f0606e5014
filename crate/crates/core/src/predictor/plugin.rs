//! External predictor process.
//!
//! The command receives the fragment's extraction record as JSON on stdin and
//! prints one chain per line, best first, as comma-separated op names.

use std::io::Write;
use std::process::{Command, Stdio};

use super::vocabulary::{parse_label, BaseOp};
use super::{Origin, PredictError, Predictor};
use crate::frontend::{to_extraction_json, LoopFragment};

#[derive(Debug, Clone)]
pub struct ExternalPredictor {
    command: String,
}

impl ExternalPredictor {
    /// `command` is run through `sh -c`.
    pub fn new(command: impl Into<String>) -> Self {
        ExternalPredictor {
            command: command.into(),
        }
    }
}

impl Predictor for ExternalPredictor {
    fn name(&self) -> &str {
        &self.command
    }

    fn origin(&self) -> Origin {
        Origin::Plugin
    }

    fn rank(&self, fragment: &LoopFragment) -> Result<Vec<Vec<BaseOp>>, PredictError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| PredictError::Plugin(format!("cannot start `{}`: {e}", self.command)))?;
        let input = to_extraction_json(fragment);
        if let Some(mut stdin) = child.stdin.take() {
            // A predictor that ignores its input may close stdin early.
            let _ = stdin.write_all(input.as_bytes());
        }
        let output = child
            .wait_with_output()
            .map_err(|e| PredictError::Plugin(e.to_string()))?;
        if !output.status.success() {
            return Err(PredictError::Plugin(format!(
                "`{}` exited with {}: {}",
                self.command,
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let text = String::from_utf8_lossy(&output.stdout);
        let chains = text.lines().filter_map(parse_label).collect();
        Ok(chains)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{extract_fragments, SourceProgram};

    fn fragment() -> LoopFragment {
        extract_fragments(&SourceProgram::from_source("t.py", "for x in xs:\n    out.append(x)\n").unwrap()).remove(0)
    }

    #[test]
    fn reads_ranked_lines_and_drops_invalid_ones() {
        let p = ExternalPredictor::new("cat >/dev/null; printf 'filter,count\\nnonsense\\ncount,map\\nmap()\\n'");
        let chains = p.rank(&fragment()).unwrap();
        assert_eq!(chains, vec![vec![BaseOp::Filter, BaseOp::Count], vec![BaseOp::Map]]);
    }

    #[test]
    fn receives_extraction_json() {
        let p = ExternalPredictor::new("grep -q '\"Loop ID\": 1' && echo map");
        assert_eq!(p.rank(&fragment()).unwrap(), vec![vec![BaseOp::Map]]);
    }

    #[test]
    fn failing_command() {
        assert!(matches!(ExternalPredictor::new("exit 3").rank(&fragment()), Err(PredictError::Plugin(_))));
    }
}
