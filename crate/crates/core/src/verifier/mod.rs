//! Test-driven acceptance of candidate translations.

pub mod report;
pub mod runner;
pub mod sandbox;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::codegen::{Backend, CodegenError};
use crate::frontend::{LoopFragment, SourceProgram};
use crate::predictor::CandidateChain;
use crate::refactor::{refactor, RefactoredSnippet};
pub use report::{parse_test_report, MalformedReport, TestFailure};
pub use runner::run_tests_isolated;
pub use sandbox::{materialize_candidate, materialize_text, Sandbox};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// Runtime noise that does not count as stderr output.
pub const DEFAULT_STDERR_ALLOWLIST: &[&str] = &[
    r"^\s*$",
    r"^\d{2}/\d{2}/\d{2} \d{2}:\d{2}:\d{2} (WARN|INFO) ",
    r"^Setting default log level to",
    r"^To adjust logging level use",
    r"^Using Spark's default log4j profile",
    r"^SLF4J: ",
    r"^WARNING: .*illegal reflective access",
    r"^WARNING: (Please consider reporting|Use --illegal-access|All illegal access)",
];

#[derive(Debug, Clone)]
pub struct VerifierConfig {
    pub python: String,
    pub timeout: Duration,
    pub backend: Backend,
    /// Lines of stderr matching any pattern are dropped before the emptiness
    /// check.
    pub stderr_allowlist: Vec<Regex>,
    /// Where sandboxes are created; the system temp dir when unset.
    pub sandbox_root: Option<PathBuf>,
    pub disable_plugin_autoload: bool,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            python: "python3".into(),
            timeout: DEFAULT_TIMEOUT,
            backend: Backend::Shim,
            stderr_allowlist: DEFAULT_STDERR_ALLOWLIST
                .iter()
                .map(|p| Regex::new(p).expect("valid allowlist pattern"))
                .collect(),
            sandbox_root: None,
            disable_plugin_autoload: true,
        }
    }
}

impl VerifierConfig {
    pub fn filter_stderr(&self, raw: &str) -> String {
        raw.lines()
            .filter(|l| !self.stderr_allowlist.iter().any(|re| re.is_match(l)))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Verified,
    Rejected,
    Crashed,
    TimedOut,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub tests_run: usize,
    pub failures: Vec<TestFailure>,
    /// Stderr after the allowlist filter.
    pub stderr_text: String,
    #[serde(skip)]
    pub raw_stderr: String,
    #[serde(skip)]
    pub stdout_text: String,
    pub exit_code: Option<i32>,
    pub duration_secs: f64,
}

impl VerificationReport {
    /// A one-line reason for a non-verified run.
    pub fn summary(&self) -> String {
        match self.verdict {
            Verdict::Verified => format!("{} tests passed", self.tests_run),
            Verdict::TimedOut => format!("timed out after {:.1}s", self.duration_secs),
            _ => {
                if let Some(f) = self.failures.first() {
                    format!("{}: {}", f.name, f.message.lines().next().unwrap_or(""))
                } else if let Some(line) = self.stderr_text.lines().find(|l| !l.trim().is_empty()) {
                    line.to_string()
                } else if self.tests_run == 0 {
                    "no tests ran".into()
                } else {
                    format!("runner exited with {:?}", self.exit_code)
                }
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum VerifierError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("program and test files would share the name `{0}`")]
    NameClash(String),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AttemptOutcome {
    Unrefactorable { reason: String },
    /// Sandbox or code generation failure.
    Error { reason: String },
    Ran { verdict: Verdict, tests_run: usize, failures: usize, detail: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateAttempt {
    pub chain: String,
    pub rank: usize,
    #[serde(flatten)]
    pub outcome: AttemptOutcome,
    pub duration_secs: f64,
}

#[derive(Debug, Clone)]
pub struct Verified {
    pub chain: CandidateChain,
    pub snippet: RefactoredSnippet,
    pub report: VerificationReport,
    pub attempts: Vec<CandidateAttempt>,
}

#[derive(Debug, Clone, Error)]
#[error("no translation found for fragment {fragment_id} after {} candidates", attempts.len())]
pub struct NoTranslationFound {
    pub fragment_id: usize,
    pub attempts: Vec<CandidateAttempt>,
}

/// Builds, materializes and tests one candidate.
pub fn check_candidate(
    program: &SourceProgram,
    fragment: &LoopFragment,
    chain: &CandidateChain,
    tests: &Path,
    config: &VerifierConfig,
) -> (AttemptOutcome, Option<(RefactoredSnippet, VerificationReport)>) {
    let snippet = match refactor(fragment, chain) {
        Ok(s) => s,
        Err(e) => {
            let crate::refactor::RefactorError::Unrefactorable(reason) = e;
            return (AttemptOutcome::Unrefactorable { reason }, None);
        }
    };
    let sandbox = match materialize_candidate(program, &[(fragment, &snippet)], tests, config) {
        Ok(s) => s,
        Err(e) => return (AttemptOutcome::Error { reason: e.to_string() }, None),
    };
    let report = run_tests_isolated(&sandbox, config);
    drop(sandbox);
    let outcome = AttemptOutcome::Ran {
        verdict: report.verdict,
        tests_run: report.tests_run,
        failures: report.failures.len(),
        detail: report.summary(),
    };
    (outcome, Some((snippet, report)))
}

/// The first candidate, in rank order, whose program passes the tests.
pub fn verify_candidates(
    program: &SourceProgram,
    fragment: &LoopFragment,
    candidates: &[CandidateChain],
    tests: &Path,
    config: &VerifierConfig,
) -> Result<Verified, NoTranslationFound> {
    let mut attempts = Vec::new();
    for (i, chain) in candidates.iter().enumerate() {
        let started = Instant::now();
        let (outcome, result) = check_candidate(program, fragment, chain, tests, config);
        log::debug!("fragment {} candidate {} [{}]: {:?}", fragment.id, i + 1, chain.label(), outcome);
        attempts.push(CandidateAttempt {
            chain: chain.label(),
            rank: i + 1,
            outcome,
            duration_secs: started.elapsed().as_secs_f64(),
        });
        if let Some((snippet, report)) = result {
            if report.verdict == Verdict::Verified {
                return Ok(Verified {
                    chain: chain.clone(),
                    snippet,
                    report,
                    attempts,
                });
            }
        }
    }
    Err(NoTranslationFound {
        fragment_id: fragment.id,
        attempts,
    })
}
