//! Splices verified snippets back into the source program.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::frontend::ast::{Constant, ExprKind, StmtKind};
use crate::frontend::lexer::{tokenize, TokenKind};
use crate::frontend::parser::parse_module;
use crate::frontend::{LoopFragment, SourceProgram};
use crate::predictor::BaseOp;
use crate::refactor::{rdd_name, RefactoredSnippet};

pub const BOOTSTRAP_FN: &str = "get_or_create_spark_context";

/// Runtime the bootstrap imports. The emitted dataset calls are the same for
/// both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Shim,
    Spark,
}

impl Backend {
    pub fn module(self) -> &'static str {
        match self {
            Backend::Shim => "rdd_shim",
            Backend::Spark => "pyspark",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Shim => "shim",
            Backend::Spark => "spark",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "shim" => Ok(Backend::Shim),
            "spark" => Ok(Backend::Spark),
            other => Err(format!("unknown backend `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplicePlan {
    pub fragment_id: usize,
    pub insert_at: usize,
    /// Inclusive 1-based line range replaced by the splice.
    pub removed_span: (usize, usize),
    pub parallelize_list: Vec<String>,
    pub skip_secondary_parallelize: bool,
    pub indent: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodegenError {
    #[error("splices for fragments {0} and {1} overlap")]
    OverlappingSplices(usize, usize),
    #[error("{plans} splice plans but {snippets} snippets")]
    CountMismatch { plans: usize, snippets: usize },
    #[error("splice for fragment {id} covers lines {start}-{end}, outside the program")]
    OutOfRange { id: usize, start: usize, end: usize },
    #[error("generated program does not parse: line {line}: {message}")]
    Reparse { line: usize, message: String },
}

/// Context factory definition, placed once per output file.
pub fn emit_bootstrap(app_name: &str, backend: Backend) -> String {
    let name = serde_json::to_string(app_name).expect("string serializes");
    format!(
        "from {module} import SparkConf, SparkContext\n\
         \n\
         \n\
         def {BOOTSTRAP_FN}():\n\
         \x20   conf = SparkConf().setAppName({name}).setMaster(\"local[*]\")\n\
         \x20   return SparkContext.getOrCreate(conf)\n",
        module = backend.module()
    )
}

pub fn plan_splice(fragment: &LoopFragment, snippet: &RefactoredSnippet) -> SplicePlan {
    let src = &fragment.source;
    let start = fragment.stmt.span.start;
    let line_start = src[..start].rfind('\n').map_or(0, |i| i + 1);
    let indent = src[line_start..start].to_string();
    let flat = snippet.chain.ops.contains(&BaseOp::FlatMap);
    let parallelize_list = if flat {
        vec![snippet.datasets().remove(0)]
    } else {
        snippet.datasets()
    };
    SplicePlan {
        fragment_id: fragment.id,
        insert_at: fragment.start_line,
        removed_span: (fragment.start_line, fragment.end_line),
        parallelize_list,
        skip_secondary_parallelize: flat,
        indent,
    }
}

/// Name for the context variable that does not clash with the program.
pub fn context_var(program: &SourceProgram) -> &'static str {
    let names: HashSet<String> = tokenize(&program.text)
        .map(|toks| {
            toks.into_iter()
                .filter_map(|t| match t.kind {
                    TokenKind::Name(n) => Some(n),
                    _ => None,
                })
                .collect()
        })
        .unwrap_or_default();
    ["sc", "spark_ctx", "spark_ctx_"].into_iter().find(|c| !names.contains(*c)).unwrap_or("spark_ctx__")
}

/// Line after which the bootstrap goes: past a shebang or encoding comment,
/// the module docstring and `__future__` imports.
fn bootstrap_line(program: &SourceProgram) -> usize {
    let mut after = 0;
    for n in 1..=program.line_count().min(2) {
        let line = program.line(n).unwrap_or("");
        let magic = (n == 1 && line.starts_with("#!")) || (line.starts_with('#') && line.contains("coding"));
        if magic && after == n - 1 {
            after = n;
        }
    }
    for (i, stmt) in program.module.body.iter().enumerate() {
        let keep = match &stmt.kind {
            StmtKind::Expr(e) => i == 0 && matches!(e.kind, ExprKind::Constant(Constant::Str(_))),
            StmtKind::ImportFrom { module, .. } => module == "__future__",
            _ => false,
        };
        if !keep {
            break;
        }
        after = after.max(stmt.span.end_line);
    }
    after
}

fn app_name(program: &SourceProgram) -> String {
    program
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "seq2rdd".into())
}

/// The program with every planned span replaced. Lines outside the spans are
/// copied byte for byte; the bootstrap is added only when there is a splice.
pub fn generate_program(
    program: &SourceProgram,
    plans: &[SplicePlan],
    snippets: &[RefactoredSnippet],
    backend: Backend,
) -> Result<String, CodegenError> {
    if plans.len() != snippets.len() {
        return Err(CodegenError::CountMismatch {
            plans: plans.len(),
            snippets: snippets.len(),
        });
    }
    if plans.is_empty() {
        return Ok(program.text.clone());
    }
    let mut order: Vec<usize> = (0..plans.len()).collect();
    order.sort_by_key(|&i| plans[i].removed_span);
    for w in order.windows(2) {
        let (a, b) = (&plans[w[0]], &plans[w[1]]);
        if b.removed_span.0 <= a.removed_span.1 {
            return Err(CodegenError::OverlappingSplices(a.fragment_id, b.fragment_id));
        }
    }
    let total = program.line_count();
    for p in plans {
        let (start, end) = p.removed_span;
        if start == 0 || end < start || end > total {
            return Err(CodegenError::OutOfRange {
                id: p.fragment_id,
                start,
                end,
            });
        }
    }

    let eol = if program.lines.first().is_some_and(|l| l.ends_with("\r\n")) { "\r\n" } else { "\n" };
    let ctx = context_var(program);
    let boot_after = bootstrap_line(program);
    let bootstrap = emit_bootstrap(&app_name(program), backend).replace('\n', eol);

    let mut out = String::with_capacity(program.text.len() + 512);
    let push_bootstrap = |out: &mut String| {
        if !out.is_empty() {
            if !out.ends_with('\n') {
                out.push_str(eol);
            }
            out.push_str(eol);
        }
        out.push_str(&bootstrap);
        out.push_str(eol);
        out.push_str(eol);
    };
    if boot_after == 0 {
        push_bootstrap(&mut out);
    }
    let mut next = order.into_iter().peekable();
    let mut n = 1;
    while n <= total {
        if let Some(&i) = next.peek() {
            let plan = &plans[i];
            if plan.removed_span.0 == n {
                next.next();
                let end = plan.removed_span.1;
                let mut block = splice_block(plan, &snippets[i], ctx, eol);
                if !program.lines[end - 1].ends_with('\n') {
                    block.truncate(block.len() - eol.len());
                }
                out.push_str(&block);
                if (n..=end).contains(&boot_after) {
                    push_bootstrap(&mut out);
                }
                n = end + 1;
                continue;
            }
        }
        out.push_str(&program.lines[n - 1]);
        if n == boot_after {
            push_bootstrap(&mut out);
        }
        n += 1;
    }

    parse_module(&out).map_err(|e| CodegenError::Reparse {
        line: e.line,
        message: e.message,
    })?;
    Ok(out)
}

fn splice_block(plan: &SplicePlan, snippet: &RefactoredSnippet, ctx: &str, eol: &str) -> String {
    let ind = &plan.indent;
    let mut lines = vec![format!("{ind}{ctx} = {BOOTSTRAP_FN}()")];
    for d in &plan.parallelize_list {
        lines.push(format!("{ind}{} = {ctx}.parallelize({d})", rdd_name(d)));
    }
    lines.push(format!("{ind}{}", snippet.text));
    lines.push(format!("{ind}{ctx}.stop()"));
    let mut block = lines.join(eol);
    block.push_str(eol);
    block
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::extract_fragments;
    use crate::predictor::{CandidateChain, Origin};
    use crate::refactor::refactor;
    use BaseOp::*;

    const EVEN: &str = "def even_filter(numbers):\n    evens = []\n    for num in numbers:\n        if num % 2 == 0:\n            evens.append(num)\n    return evens\n";

    fn splice(src: &str, chains: &[&[BaseOp]]) -> Result<String, CodegenError> {
        let p = SourceProgram::from_source("prog.py", src).unwrap();
        let frags = extract_fragments(&p);
        let mut plans = Vec::new();
        let mut snippets = Vec::new();
        for (f, ops) in frags.iter().filter(|f| f.parent_id.is_none()).zip(chains) {
            let s = refactor(f, &CandidateChain::new(ops.to_vec(), Origin::Heuristic)).unwrap();
            plans.push(plan_splice(f, &s));
            snippets.push(s);
        }
        generate_program(&p, &plans, &snippets, Backend::Shim)
    }

    #[test]
    fn even_filter_program() {
        let out = splice(EVEN, &[&[Filter]]).unwrap();
        let expected = "from rdd_shim import SparkConf, SparkContext\n\n\n\
def get_or_create_spark_context():\n    conf = SparkConf().setAppName(\"prog\").setMaster(\"local[*]\")\n    return SparkContext.getOrCreate(conf)\n\n\n\
def even_filter(numbers):\n    evens = []\n    sc = get_or_create_spark_context()\n    numbers_rdd = sc.parallelize(numbers)\n    evens = numbers_rdd.filter(lambda num: num % 2 == 0).collect()\n    sc.stop()\n    return evens\n";
        assert_eq!(out, expected);
    }

    #[test]
    fn no_plans_is_identity() {
        let p = SourceProgram::from_source("p.py", EVEN).unwrap();
        assert_eq!(generate_program(&p, &[], &[], Backend::Spark).unwrap(), EVEN);
    }

    #[test]
    fn bootstrap_once_for_two_splices() {
        let src = "def f(prices):\n    d = []\n    for p in prices:\n        d.append(p * 2)\n    n = 0\n    for p in prices:\n        if p > 10:\n            n += 1\n    return d, n\n";
        let out = splice(src, &[&[Map], &[Filter, Count]]).unwrap();
        assert_eq!(out.matches("def get_or_create_spark_context").count(), 1);
        assert_eq!(out.matches("sc.stop()").count(), 2);
        assert!(out.contains("    n = 0\n"));
    }

    #[test]
    fn spark_bootstrap_differs_only_in_import() {
        let a = emit_bootstrap("x", Backend::Shim);
        let b = emit_bootstrap("x", Backend::Spark);
        assert_eq!(a.replace("rdd_shim", "pyspark"), b);
    }

    #[test]
    fn bootstrap_after_docstring_and_future() {
        let src = format!("#!/usr/bin/env python3\n\"\"\"Doc.\"\"\"\nfrom __future__ import annotations\n{EVEN}");
        let out = splice(&src, &[&[Filter]]).unwrap();
        assert!(out.starts_with("#!/usr/bin/env python3\n\"\"\"Doc.\"\"\"\nfrom __future__ import annotations\n\nfrom rdd_shim"));
    }

    #[test]
    fn crlf_and_missing_final_newline() {
        let src = EVEN.replace('\n', "\r\n");
        let src = src.trim_end_matches("\r\n").replace("    return evens", "");
        let src = src.trim_end().to_string();
        let out = splice(&src, &[&[Filter]]).unwrap();
        assert!(out.ends_with("    sc.stop()"));
        assert!(!out.replace("\r\n", "").contains('\n'));
    }

    #[test]
    fn nested_indent_is_preserved() {
        let src = "def f(groups):\n    out = []\n    for g in groups:\n        if g:\n            for x in g:\n                out.append(x + 1)\n    return out\n";
        let p = SourceProgram::from_source("p.py", src).unwrap();
        let frags = extract_fragments(&p);
        let inner = &frags[1];
        let plan = plan_splice(
            inner,
            &RefactoredSnippet {
                text: "out = g_rdd.map(lambda x: x + 1).collect()".into(),
                primary_dataset: "g_rdd".into(),
                secondary_dataset: None,
                result_var: "out".into(),
                requires_collect: true,
                chain: CandidateChain::new(vec![Map], Origin::Heuristic),
            },
        );
        assert_eq!(plan.indent, " ".repeat(12));
        assert_eq!(plan.removed_span, (5, 6));
    }

    #[test]
    fn overlapping_plans_are_refused() {
        let p = SourceProgram::from_source("p.py", EVEN).unwrap();
        let f = &extract_fragments(&p)[0];
        let s = refactor(f, &CandidateChain::new(vec![Filter], Origin::Heuristic)).unwrap();
        let plan = plan_splice(f, &s);
        let err = generate_program(&p, &[plan.clone(), plan], &[s.clone(), s], Backend::Shim).unwrap_err();
        assert_eq!(err, CodegenError::OverlappingSplices(1, 1));
    }

    #[test]
    fn context_var_avoids_program_names() {
        let p = SourceProgram::from_source("p.py", "sc = 1\n").unwrap();
        assert_eq!(context_var(&p), "spark_ctx");
    }

    #[test]
    fn flat_map_parallelizes_primary_only() {
        let src = "def flatten(list_of_lists):\n    result = []\n    for sublist in list_of_lists:\n        for item in sublist:\n            result.append(item)\n    return result\n";
        let p = SourceProgram::from_source("p.py", src).unwrap();
        let f = &extract_fragments(&p)[0];
        let s = refactor(f, &CandidateChain::new(vec![FlatMap], Origin::Heuristic)).unwrap();
        let plan = plan_splice(f, &s);
        assert_eq!(plan.parallelize_list, vec!["list_of_lists"]);
        assert!(plan.skip_secondary_parallelize);
    }
}
