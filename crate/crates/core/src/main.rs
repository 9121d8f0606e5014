use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seq2rdd::codegen::Backend;
use seq2rdd::driver::{run, PredictorChoice, RunConfig};
use seq2rdd::frontend::{extract_fragments, parse_program, to_extraction_json};

#[derive(Parser)]
#[command(name = "seq2rdd", version, about = "Translate sequential Python loops into RDD pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a program, keeping only candidates that pass its tests.
    Translate(TranslateArgs),
    /// Print the extracted loop fragments as JSON.
    Extract {
        input: PathBuf,
    },
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    tests: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = Backend::Shim)]
    backend: Backend,
    #[arg(long, default_value_t = 5)]
    max_candidates: usize,
    /// Only try predicted chains.
    #[arg(long)]
    no_fallback: bool,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    fallback_max_len: u8,
    /// Seconds per test run.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print each fragment's extraction record.
    #[arg(long)]
    dump_ir: bool,
    /// Fail when any fragment is left untranslated.
    #[arg(long)]
    strict: bool,
    /// Command that ranks chains for a fragment (JSON on stdin, one chain per line out).
    #[arg(long)]
    predictor_cmd: Option<String>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "python3")]
    python: String,
}

fn translate(args: TranslateArgs) -> anyhow::Result<i32> {
    let mut config = RunConfig::new(args.input, args.tests, args.output);
    config.backend = args.backend;
    config.max_candidates = args.max_candidates;
    config.enable_fallback = !args.no_fallback;
    config.fallback_max_len = args.fallback_max_len as usize;
    config.timeout_seconds = args.timeout;
    config.report_path = args.report;
    config.dump_ir = args.dump_ir;
    config.strict = args.strict;
    config.jobs = args.jobs;
    config.python = args.python;
    if let Some(cmd) = args.predictor_cmd {
        config.predictor = PredictorChoice::External(cmd);
    }
    let report = run(&config)?;
    for f in &report.fragments {
        let what = match (&f.chain, f.subsumed_by) {
            (Some(_), Some(parent)) => format!("covered by fragment {parent}"),
            (Some(chain), None) => chain.clone(),
            (None, _) => f.reason.clone().unwrap_or_default(),
        };
        eprintln!("fragment {} (lines {}-{}): {:?} {what}", f.fragment_id, f.start_line, f.end_line, f.status);
    }
    eprintln!("{:?} in {:.2}s", report.overall_status, report.total_duration_secs);
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Translate(args) => translate(args),
        Command::Extract { input } => parse_program(&input).map_err(Into::into).map(|program| {
            for f in extract_fragments(&program) {
                println!("{}", to_extraction_json(&f));
            }
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
