#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_recaudit"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    bin().args(args).env(key, value).output().expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn assert_ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(o));
}

/// Runs `simulate --export` and returns the path of the exported log.
pub fn synthetic_log(dir: &Path, agents: usize, beta: f64, seed: u64) -> PathBuf {
    let out = dir.join(format!("sim-{agents}-{beta}-{seed}"));
    let o = run(&[
        "simulate",
        "--out",
        out.to_str().unwrap(),
        "--seed",
        &seed.to_string(),
        "--agents",
        &agents.to_string(),
        "--beta",
        &beta.to_string(),
        "--export",
    ]);
    assert_ok(&o);
    out.join("synthetic.jsonl")
}

/// Every file under `root`, keyed by relative path.
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// A manifest with the run timestamp removed.
pub fn manifest_without_timestamp(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

/// Paths whose contents differ between two output trees, ignoring the
/// manifest timestamp.
pub fn tree_differences(a: &Path, b: &Path) -> Vec<String> {
    let (ta, tb) = (read_tree(a), read_tree(b));
    let mut diffs = Vec::new();
    for key in ta.keys().chain(tb.keys()).collect::<std::collections::BTreeSet<_>>() {
        match (ta.get(key), tb.get(key)) {
            (Some(x), Some(y)) if key.ends_with("manifest.json") => {
                if manifest_without_timestamp(x) != manifest_without_timestamp(y) {
                    diffs.push(key.clone());
                }
            }
            (Some(x), Some(y)) if x == y => {}
            _ => diffs.push(key.clone()),
        }
    }
    diffs
}

pub fn csv_header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(str::to_string).collect()
}

pub fn csv_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().clone();
    r.records()
        .map(|rec| h.iter().map(str::to_string).zip(rec.unwrap().iter().map(str::to_string)).collect())
        .collect()
}
