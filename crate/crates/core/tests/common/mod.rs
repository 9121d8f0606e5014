#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub program: Vec<Entry>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Entry {
    pub name: String,
    pub suite: String,
    pub function: String,
    pub fragments: usize,
    /// Python expression over `r: random.Random` giving the argument tuple.
    pub args: String,
}

impl Entry {
    pub fn dir(&self) -> PathBuf {
        corpus_dir().join(&self.suite).join(&self.name)
    }

    pub fn input(&self) -> PathBuf {
        self.dir().join(format!("{}.py", self.name))
    }

    pub fn tests(&self) -> PathBuf {
        self.dir().join(format!("test_{}.py", self.name))
    }
}

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus_dir() -> PathBuf {
    crate_dir().join("corpus")
}

pub fn shim_dir() -> PathBuf {
    crate_dir().join("shim")
}

pub fn fixture(name: &str) -> PathBuf {
    crate_dir().join("tests").join("fixtures").join(name)
}

pub fn manifest() -> Manifest {
    let text = std::fs::read_to_string(corpus_dir().join("manifest.toml")).expect("corpus manifest");
    toml::from_str(&text).expect("valid manifest")
}

pub fn python() -> Command {
    let mut cmd = Command::new("python3");
    cmd.env("PYTHONDONTWRITEBYTECODE", "1")
        .env("PYTEST_DISABLE_PLUGIN_AUTOLOAD", "1");
    cmd
}

/// Entries of `dir`, or none if it does not exist.
pub fn leftovers(dir: &Path) -> Vec<PathBuf> {
    std::fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok()).map(|e| e.path()).collect())
        .unwrap_or_default()
}

/// Compares original and translated modules on random inputs. Prints one
/// JSON object: `{"cases": n, "mismatches": m, "first": ...}`.
pub const EQUIVALENCE_HARNESS: &str = r#"
import copy
import importlib.util
import json
import random
import sys

orig_path, trans_path, shim_dir, function, args_expr, normalize, cases, seed = sys.argv[1:9]
sys.path.insert(0, shim_dir)


def load(name, path):
    spec = importlib.util.spec_from_file_location(name, path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


orig = getattr(load("orig_module", orig_path), function)
trans = getattr(load("trans_module", trans_path), function)


def norm(v):
    if isinstance(v, list):
        return sorted((norm(x) for x in v), key=repr)
    if isinstance(v, tuple):
        return tuple(norm(x) for x in v)
    if isinstance(v, dict):
        return {k: norm(x) for k, x in v.items()}
    return v


def call(f, args):
    try:
        return ("ok", f(*copy.deepcopy(args)))
    except Exception as e:
        return ("raised", type(e).__name__)


r = random.Random(int(seed))
mismatches = 0
first = None
for _ in range(int(cases)):
    args = eval(args_expr, {"r": r})
    a = call(orig, args)
    b = call(trans, args)
    if normalize == "1":
        a, b = (a[0], norm(a[1])), (b[0], norm(b[1]))
    if a != b or type(a[1]) is not type(b[1]):
        mismatches += 1
        if first is None:
            first = {"args": repr(args), "sequential": repr(a), "translated": repr(b)}
print(json.dumps({"cases": int(cases), "mismatches": mismatches, "first": first}))
"#;
