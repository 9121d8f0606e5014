//! End-to-end translation of one program against its tests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codegen::{generate_program, plan_splice, Backend};
use crate::frontend::{extract_fragments, parse_program, to_extraction_json, FrontendError, LoopFragment, SourceProgram};
use crate::predictor::{candidate_stream, BaseOp, ExternalPredictor, HeuristicPredictor, PredictError, Predictor, StaticPredictor};
use crate::refactor::RefactoredSnippet;
use crate::verifier::{
    materialize_text, run_tests_isolated, verify_candidates, CandidateAttempt, Verdict, VerificationReport, VerifierConfig,
    VerifierError,
};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PredictorChoice {
    #[default]
    Heuristic,
    /// Shell command; see [`ExternalPredictor`].
    External(String),
    /// The same ranked list for every fragment.
    Static(Vec<Vec<BaseOp>>),
}

impl PredictorChoice {
    fn build(&self) -> Box<dyn Predictor> {
        match self {
            PredictorChoice::Heuristic => Box::new(HeuristicPredictor),
            PredictorChoice::External(cmd) => Box::new(ExternalPredictor::new(cmd.clone())),
            PredictorChoice::Static(chains) => Box::new(StaticPredictor::new(chains.clone())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub test_path: PathBuf,
    pub output_path: PathBuf,
    pub backend: Backend,
    pub max_candidates: usize,
    pub enable_fallback: bool,
    pub fallback_max_len: usize,
    pub timeout_seconds: f64,
    pub report_path: Option<PathBuf>,
    pub dump_ir: bool,
    /// Any fragment left untranslated fails the run.
    pub strict: bool,
    pub predictor: PredictorChoice,
    /// Fragments verified concurrently. Per-fragment durations only add up
    /// to at most the total when this is 1.
    pub jobs: usize,
    pub python: String,
    pub sandbox_root: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, tests: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        RunConfig {
            input_path: input.into(),
            test_path: tests.into(),
            output_path: output.into(),
            backend: Backend::Shim,
            max_candidates: 5,
            enable_fallback: true,
            fallback_max_len: 3,
            timeout_seconds: 60.0,
            report_path: None,
            dump_ir: false,
            strict: false,
            predictor: PredictorChoice::Heuristic,
            jobs: 1,
            python: "python3".into(),
            sandbox_root: None,
        }
    }

    pub fn verifier_config(&self) -> VerifierConfig {
        VerifierConfig {
            python: self.python.clone(),
            timeout: Duration::from_secs_f64(self.timeout_seconds),
            backend: self.backend,
            sandbox_root: self.sandbox_root.clone(),
            disable_plugin_autoload: self.backend == Backend::Shim,
            ..VerifierConfig::default()
        }
    }

    fn validate(&self) -> Result<(), RunError> {
        if self.max_candidates < 1 {
            return Err(RunError::InvalidConfig("max_candidates must be at least 1".into()));
        }
        if !(1..=3).contains(&self.fallback_max_len) {
            return Err(RunError::InvalidConfig("fallback_max_len must be 1, 2 or 3".into()));
        }
        if !(self.timeout_seconds > 0.0 && self.timeout_seconds.is_finite()) {
            return Err(RunError::InvalidConfig("timeout must be a positive number of seconds".into()));
        }
        if self.jobs < 1 {
            return Err(RunError::InvalidConfig("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("{}: test file not found", .0.display())]
    TestsNotFound(PathBuf),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Verifier(#[from] VerifierError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FragmentStatus {
    Translated,
    NoTranslationFound,
    Untranslatable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OverallStatus {
    Translated,
    NoTranslationFound,
    /// The original program fails its own tests.
    BaselineFailed,
    /// Every fragment verified, but the assembled program did not.
    ConfirmationFailed,
}

impl OverallStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            OverallStatus::Translated => 0,
            OverallStatus::NoTranslationFound | OverallStatus::ConfirmationFailed => 2,
            OverallStatus::BaselineFailed => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FragmentReport {
    pub fragment_id: usize,
    pub start_line: usize,
    pub end_line: usize,
    pub status: FragmentStatus,
    /// Chosen chain, e.g. `filter,reduce`.
    pub chain: Option<String>,
    pub snippet: Option<String>,
    /// Set when an enclosing fragment's translation replaced this one.
    pub subsumed_by: Option<usize>,
    pub reason: Option<String>,
    pub candidates_tried: Vec<CandidateAttempt>,
    pub duration_secs: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub verdict: Verdict,
    pub tests_run: usize,
    pub detail: String,
    pub duration_secs: f64,
}

impl From<&VerificationReport> for RunSummary {
    fn from(r: &VerificationReport) -> Self {
        RunSummary {
            verdict: r.verdict,
            tests_run: r.tests_run,
            detail: r.summary(),
            duration_secs: r.duration_secs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationReport {
    pub input: PathBuf,
    pub tests: PathBuf,
    /// Written only when the overall status is `Translated`.
    pub output: Option<PathBuf>,
    pub backend: Backend,
    pub overall_status: OverallStatus,
    pub baseline: Option<RunSummary>,
    pub confirmation: Option<RunSummary>,
    pub fragments: Vec<FragmentReport>,
    pub total_duration_secs: f64,
    /// The assembled program, also when it was not written.
    #[serde(skip)]
    pub program_text: Option<String>,
}

impl TranslationReport {
    pub fn exit_code(&self) -> i32 {
        self.overall_status.exit_code()
    }

    pub fn fragment(&self, id: usize) -> Option<&FragmentReport> {
        self.fragments.iter().find(|f| f.fragment_id == id)
    }

    pub fn translated_count(&self) -> usize {
        self.fragments.iter().filter(|f| f.status == FragmentStatus::Translated).count()
    }
}

struct Job<'a> {
    program: &'a SourceProgram,
    fragments: &'a [LoopFragment],
    children: BTreeMap<usize, Vec<usize>>,
    predictor: Box<dyn Predictor>,
    config: &'a RunConfig,
    verifier: VerifierConfig,
}

struct Processed {
    reports: Vec<FragmentReport>,
    snippets: Vec<(usize, RefactoredSnippet)>,
}

impl Job<'_> {
    fn fragment(&self, id: usize) -> &LoopFragment {
        &self.fragments[id - 1]
    }

    fn descendants(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &c in self.children.get(&id).map(Vec::as_slice).unwrap_or(&[]) {
            out.push(c);
            out.extend(self.descendants(c));
        }
        out
    }

    fn entry(&self, f: &LoopFragment, status: FragmentStatus) -> FragmentReport {
        FragmentReport {
            fragment_id: f.id,
            start_line: f.start_line,
            end_line: f.end_line,
            status,
            chain: None,
            snippet: None,
            subsumed_by: None,
            reason: None,
            candidates_tried: Vec::new(),
            duration_secs: 0.0,
            notes: Vec::new(),
        }
    }

    fn process(&self, id: usize) -> Processed {
        let started = Instant::now();
        let f = self.fragment(id);
        let mut out = Processed {
            reports: Vec::new(),
            snippets: Vec::new(),
        };
        if let Some(reason) = &f.untranslatable {
            let mut e = self.entry(f, FragmentStatus::Untranslatable);
            e.reason = Some(reason.clone());
            e.duration_secs = started.elapsed().as_secs_f64();
            out.reports.push(e);
            self.process_children(id, &mut out);
            return out;
        }
        let fallback = self.config.enable_fallback.then_some(self.config.fallback_max_len);
        let candidates = candidate_stream(self.predictor.as_ref(), f, self.config.max_candidates, fallback);
        let mut e = self.entry(f, FragmentStatus::NoTranslationFound);
        match candidates {
            Err(err) => {
                e.reason = Some(match err {
                    PredictError::EmptyPrediction(_) => "no candidate chains".to_string(),
                    other => other.to_string(),
                });
            }
            Ok(candidates) => match verify_candidates(self.program, f, &candidates, &self.config.test_path, &self.verifier) {
                Ok(v) => {
                    let label = v.chain.label();
                    e.status = FragmentStatus::Translated;
                    e.chain = Some(label.clone());
                    e.snippet = Some(v.snippet.text.clone());
                    e.candidates_tried = v.attempts;
                    e.duration_secs = started.elapsed().as_secs_f64();
                    out.reports.push(e);
                    out.snippets.push((id, v.snippet));
                    for d in self.descendants(id) {
                        let mut sub = self.entry(self.fragment(d), FragmentStatus::Translated);
                        sub.chain = Some(label.clone());
                        sub.subsumed_by = Some(id);
                        out.reports.push(sub);
                    }
                    return out;
                }
                Err(ntf) => {
                    e.reason = Some(format!("none of {} candidates verified", ntf.attempts.len()));
                    e.candidates_tried = ntf.attempts;
                }
            },
        }
        e.duration_secs = started.elapsed().as_secs_f64();
        out.reports.push(e);
        self.process_children(id, &mut out);
        out
    }

    fn process_children(&self, id: usize, out: &mut Processed) {
        for &c in self.children.get(&id).map(Vec::as_slice).unwrap_or(&[]) {
            let p = self.process(c);
            out.reports.extend(p.reports);
            out.snippets.extend(p.snippets);
        }
    }
}

/// Notes a translated fragment whose input an untranslated fragment of the
/// same function still reads as a plain dataset.
fn note_shared_datasets(fragments: &[LoopFragment], reports: &mut [FragmentReport]) {
    let status: BTreeMap<usize, (FragmentStatus, Option<usize>)> =
        reports.iter().map(|r| (r.fragment_id, (r.status, r.subsumed_by))).collect();
    let mut notes: Vec<(usize, String)> = Vec::new();
    for t in fragments {
        if status.get(&t.id) != Some(&(FragmentStatus::Translated, None)) {
            continue;
        }
        for g in fragments {
            if g.id == t.id || g.context.function != t.context.function {
                continue;
            }
            if status.get(&g.id).map(|s| s.0) == Some(FragmentStatus::Translated) {
                continue;
            }
            for d in t.input_datasets.iter().filter(|d| g.input_datasets.contains(d)) {
                notes.push((t.id, format!("`{d}` is also read by untranslated fragment {}", g.id)));
                notes.push((g.id, format!("reads `{d}` as a plain dataset; fragment {} uses it distributed", t.id)));
            }
        }
    }
    for (id, note) in notes {
        if let Some(r) = reports.iter_mut().find(|r| r.fragment_id == id) {
            r.notes.push(note);
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn finish(mut report: TranslationReport, config: &RunConfig, started: Instant) -> Result<TranslationReport, RunError> {
    report.total_duration_secs = started.elapsed().as_secs_f64();
    if let Some(path) = &config.report_path {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write(path, &json)?;
    }
    Ok(report)
}

/// Extracts, predicts, refactors and verifies every fragment, then assembles
/// and confirms the output program.
pub fn run(config: &RunConfig) -> Result<TranslationReport, RunError> {
    let started = Instant::now();
    config.validate()?;
    let program = parse_program(&config.input_path)?;
    if !config.test_path.is_file() {
        return Err(RunError::TestsNotFound(config.test_path.clone()));
    }
    let fragments = extract_fragments(&program);
    if config.dump_ir {
        for f in &fragments {
            println!("{}", to_extraction_json(f));
        }
    }
    let verifier = config.verifier_config();
    let mut report = TranslationReport {
        input: config.input_path.clone(),
        tests: config.test_path.clone(),
        output: None,
        backend: config.backend,
        overall_status: OverallStatus::NoTranslationFound,
        baseline: None,
        confirmation: None,
        fragments: Vec::new(),
        total_duration_secs: 0.0,
        program_text: None,
    };

    let sandbox = materialize_text(&program, &program.text, &config.test_path, &verifier)?;
    let baseline = run_tests_isolated(&sandbox, &verifier);
    drop(sandbox);
    report.baseline = Some(RunSummary::from(&baseline));
    if baseline.verdict != Verdict::Verified {
        log::warn!("baseline run failed: {}", baseline.summary());
        report.overall_status = OverallStatus::BaselineFailed;
        return finish(report, config, started);
    }

    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for f in &fragments {
        if let Some(p) = f.parent_id {
            children.entry(p).or_default().push(f.id);
        }
    }
    let job = Job {
        program: &program,
        fragments: &fragments,
        children,
        predictor: config.predictor.build(),
        config,
        verifier: verifier.clone(),
    };
    let roots: Vec<usize> = fragments.iter().filter(|f| f.parent_id.is_none()).map(|f| f.id).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| RunError::InvalidConfig(e.to_string()))?;
    let processed: Vec<Processed> = pool.install(|| roots.par_iter().map(|&id| job.process(id)).collect());
    let mut snippets: Vec<(usize, RefactoredSnippet)> = Vec::new();
    for p in processed {
        report.fragments.extend(p.reports);
        snippets.extend(p.snippets);
    }
    report.fragments.sort_by_key(|r| r.fragment_id);
    snippets.sort_by_key(|(id, _)| *id);
    note_shared_datasets(&fragments, &mut report.fragments);

    let all_translated = report.fragments.iter().all(|r| match r.status {
        FragmentStatus::Translated => true,
        FragmentStatus::Untranslatable => !config.strict,
        FragmentStatus::NoTranslationFound => false,
    });
    if !all_translated {
        report.overall_status = OverallStatus::NoTranslationFound;
        return finish(report, config, started);
    }

    let plans: Vec<_> = snippets.iter().map(|(id, s)| plan_splice(&fragments[id - 1], s)).collect();
    let texts: Vec<_> = snippets.into_iter().map(|(_, s)| s).collect();
    let output = match generate_program(&program, &plans, &texts, config.backend) {
        Ok(text) => text,
        Err(e) => {
            report.confirmation = Some(RunSummary {
                verdict: Verdict::Crashed,
                tests_run: 0,
                detail: e.to_string(),
                duration_secs: 0.0,
            });
            report.overall_status = OverallStatus::ConfirmationFailed;
            return finish(report, config, started);
        }
    };
    if !plans.is_empty() {
        let sandbox = materialize_text(&program, &output, &config.test_path, &verifier)?;
        let confirmation = run_tests_isolated(&sandbox, &verifier);
        drop(sandbox);
        report.confirmation = Some(RunSummary::from(&confirmation));
        if confirmation.verdict != Verdict::Verified {
            report.overall_status = OverallStatus::ConfirmationFailed;
            report.program_text = Some(output);
            return finish(report, config, started);
        }
    }
    write(&config.output_path, &output)?;
    report.output = Some(config.output_path.clone());
    report.program_text = Some(output);
    report.overall_status = OverallStatus::Translated;
    finish(report, config, started)
}
