//! Runs pytest in a sandbox as a child process group.

use std::io::Read;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::report::parse_test_report;
use super::sandbox::{Sandbox, REPORT_FILE};
use super::{Verdict, VerificationReport, VerifierConfig};

fn drain<R: Read + Send + 'static>(stream: Option<R>) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut s) = stream {
            let _ = s.read_to_end(&mut buf);
        }
        buf
    })
}

#[cfg(unix)]
fn kill_tree(child: &mut Child) {
    // The child leads its own process group, so this reaches pytest's
    // children as well.
    unsafe {
        libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_tree(child: &mut Child) {
    let _ = child.kill();
}

pub fn pytest_command(sandbox: &Sandbox, config: &VerifierConfig) -> Command {
    let mut cmd = Command::new(&config.python);
    cmd.arg("-m")
        .arg("pytest")
        .arg("-q")
        .arg("-p")
        .arg("no:cacheprovider")
        .arg("--rootdir")
        .arg(sandbox.path())
        .arg(format!("--junitxml={REPORT_FILE}"))
        .arg(&sandbox.test_file)
        .current_dir(sandbox.path())
        .env("PYTHONDONTWRITEBYTECODE", "1")
        .env("PYTHONPATH", sandbox.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if config.disable_plugin_autoload {
        cmd.env("PYTEST_DISABLE_PLUGIN_AUTOLOAD", "1");
    }
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    cmd
}

/// Runs the sandbox's tests, killing the process group after `config.timeout`.
pub fn run_tests_isolated(sandbox: &Sandbox, config: &VerifierConfig) -> VerificationReport {
    let started = Instant::now();
    let crashed = |message: String| VerificationReport {
        verdict: Verdict::Crashed,
        tests_run: 0,
        failures: Vec::new(),
        stderr_text: message.clone(),
        raw_stderr: message,
        stdout_text: String::new(),
        exit_code: None,
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let mut child = match pytest_command(sandbox, config).spawn() {
        Ok(c) => c,
        Err(e) => return crashed(format!("cannot start {}: {e}", config.python)),
    };
    let out = drain(child.stdout.take());
    let err = drain(child.stderr.take());

    let deadline = started + config.timeout;
    let mut timed_out = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if Instant::now() >= deadline => {
                kill_tree(&mut child);
                timed_out = true;
                break child.wait().ok();
            }
            Ok(None) => thread::sleep(Duration::from_millis(10)),
            Err(_) => {
                kill_tree(&mut child);
                break child.wait().ok();
            }
        }
    };
    let stdout_text = String::from_utf8_lossy(&out.join().unwrap_or_default()).into_owned();
    let raw_stderr = String::from_utf8_lossy(&err.join().unwrap_or_default()).into_owned();
    let exit_code = status.and_then(|s| s.code());
    let stderr_text = config.filter_stderr(&raw_stderr);
    let mut report = VerificationReport {
        verdict: Verdict::Crashed,
        tests_run: 0,
        failures: Vec::new(),
        stderr_text,
        raw_stderr,
        stdout_text,
        exit_code,
        duration_secs: 0.0,
    };
    if timed_out {
        report.verdict = Verdict::TimedOut;
    } else {
        match std::fs::read_to_string(sandbox.report_path()) {
            Err(_) => {
                if report.stderr_text.is_empty() {
                    report.stderr_text = format!("test runner exited with {exit_code:?} and wrote no report");
                }
            }
            Ok(xml) => match parse_test_report(&xml) {
                Err(e) => report.stderr_text = format!("{e}\n{}", report.stderr_text),
                Ok((tests_run, failures)) => {
                    report.tests_run = tests_run;
                    report.failures = failures;
                    report.verdict = if report.failures.is_empty() && tests_run >= 1 && report.stderr_text.is_empty() {
                        Verdict::Verified
                    } else {
                        Verdict::Rejected
                    };
                }
            },
        }
    }
    report.duration_secs = started.elapsed().as_secs_f64();
    report
}
