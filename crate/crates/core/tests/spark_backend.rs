//! The spark variant of a translation, run against a stand-in `pyspark`
//! module that re-exports the shim.

mod common;

use seq2rdd::codegen::{generate_program, plan_splice, Backend};
use seq2rdd::frontend::{extract_fragments, parse_program};
use seq2rdd::predictor::{BaseOp, CandidateChain, Origin};
use seq2rdd::refactor::refactor;
use tempfile::TempDir;

#[test]
fn spark_output_passes_the_same_tests() {
    let dir = common::corpus_dir().join("simple_operations/multiple_loop");
    let program = parse_program(&dir.join("multiple_loop.py")).unwrap();
    let fragments = extract_fragments(&program);
    let chains = [vec![BaseOp::Map], vec![BaseOp::Filter, BaseOp::Count]];
    let snippets: Vec<_> = fragments
        .iter()
        .zip(chains)
        .map(|(f, ops)| refactor(f, &CandidateChain::new(ops, Origin::Heuristic)).unwrap())
        .collect();
    let plans: Vec<_> = fragments.iter().zip(&snippets).map(|(f, s)| plan_splice(f, s)).collect();
    let shim_text = generate_program(&program, &plans, &snippets, Backend::Shim).unwrap();
    let spark_text = generate_program(&program, &plans, &snippets, Backend::Spark).unwrap();
    assert!(spark_text.starts_with("from pyspark import SparkConf, SparkContext\n"));
    assert_eq!(
        spark_text.replacen("from pyspark import", "from rdd_shim import", 1),
        shim_text
    );

    let work = TempDir::new().unwrap();
    std::fs::write(work.path().join("multiple_loop.py"), &spark_text).unwrap();
    std::fs::copy(dir.join("test_multiple_loop.py"), work.path().join("test_multiple_loop.py")).unwrap();
    std::fs::copy(common::shim_dir().join("rdd_shim.py"), work.path().join("rdd_shim.py")).unwrap();
    std::fs::write(work.path().join("pyspark.py"), "from rdd_shim import *\n").unwrap();
    let out = common::python()
        .args(["-m", "pytest", "-q", "-p", "no:cacheprovider", "test_multiple_loop.py"])
        .current_dir(work.path())
        .env("PYTHONPATH", work.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}
