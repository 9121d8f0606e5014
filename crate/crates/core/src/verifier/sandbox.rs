//! One throwaway directory per candidate run.

use std::fs;
use std::path::{Path, PathBuf};

use tempfile::TempDir;

use super::{VerifierConfig, VerifierError};
use crate::codegen::{generate_program, plan_splice};
use crate::frontend::{LoopFragment, SourceProgram};
use crate::refactor::RefactoredSnippet;

pub const SHIM_SOURCE: &str = include_str!("../../shim/rdd_shim.py");
pub const SHIM_FILE: &str = "rdd_shim.py";
pub const REPORT_FILE: &str = "report.xml";

/// The directory is deleted when the sandbox is dropped.
#[derive(Debug)]
pub struct Sandbox {
    dir: TempDir,
    pub program_file: PathBuf,
    pub test_file: PathBuf,
}

impl Sandbox {
    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn report_path(&self) -> PathBuf {
        self.dir.path().join(REPORT_FILE)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> VerifierError + '_ {
    move |source| VerifierError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `text` as the program, next to an unmodified copy of the tests and
/// the shim.
pub fn materialize_text(program: &SourceProgram, text: &str, tests: &Path, config: &VerifierConfig) -> Result<Sandbox, VerifierError> {
    let program_name = program.file_name();
    let test_name = tests
        .file_name()
        .ok_or_else(|| VerifierError::Io {
            path: tests.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a file"),
        })?
        .to_string_lossy()
        .into_owned();
    if test_name == program_name || test_name == SHIM_FILE || program_name == SHIM_FILE {
        return Err(VerifierError::NameClash(program_name));
    }
    let root = config.sandbox_root.clone().unwrap_or_else(std::env::temp_dir);
    let dir = tempfile::Builder::new()
        .prefix("seq2rdd-")
        .tempdir_in(&root)
        .map_err(io_err(&root))?;
    let program_file = dir.path().join(&program_name);
    let test_file = dir.path().join(&test_name);
    fs::write(&program_file, text).map_err(io_err(&program_file))?;
    fs::copy(tests, &test_file).map_err(io_err(tests))?;
    let shim = dir.path().join(SHIM_FILE);
    fs::write(&shim, SHIM_SOURCE).map_err(io_err(&shim))?;
    Ok(Sandbox {
        dir,
        program_file,
        test_file,
    })
}

/// Generates the program with `splices` applied and materializes it.
pub fn materialize_candidate(
    program: &SourceProgram,
    splices: &[(&LoopFragment, &RefactoredSnippet)],
    tests: &Path,
    config: &VerifierConfig,
) -> Result<Sandbox, VerifierError> {
    let plans: Vec<_> = splices.iter().map(|(f, s)| plan_splice(f, s)).collect();
    let snippets: Vec<_> = splices.iter().map(|(_, s)| (*s).clone()).collect();
    let text = generate_program(program, &plans, &snippets, config.backend)?;
    materialize_text(program, &text, tests, config)
}
