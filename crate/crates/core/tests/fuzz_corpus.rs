//! Replays the checked-in fuzz corpus with the same checks the fuzz targets
//! make, so regressions on known inputs show up under `cargo test`.

use std::fs;
use std::path::PathBuf;

use recaudit::datamodel::{parse_str, write_log, AnalysisWindow, LogFormat, ParseOptions};
use recaudit::simulator::SimConfig;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn replay_log(target: &str, format: LogFormat) -> usize {
    let opts = ParseOptions::default();
    let mut accepted = 0;
    for (name, text) in seeds(target) {
        if let Ok(ds) = parse_str(&text, format, &opts) {
            let mut out = Vec::new();
            write_log(&ds, format, &mut out).unwrap();
            let again = parse_str(std::str::from_utf8(&out).unwrap(), format, &opts).unwrap();
            assert_eq!(ds, again, "{name}");
            accepted += 1;
        }
    }
    accepted
}

#[test]
fn jsonl_seeds() {
    assert_eq!(replay_log("parse_jsonl", LogFormat::JsonLines), 1);
}

#[test]
fn csv_seeds() {
    assert_eq!(replay_log("parse_csv", LogFormat::Csv), 1);
}

#[test]
fn sim_config_seeds() {
    let mut accepted = Vec::new();
    for (name, text) in seeds("sim_config") {
        if let Ok(cfg) = SimConfig::from_json(&text) {
            cfg.validate().unwrap();
            accepted.push(name);
        }
    }
    assert_eq!(accepted, ["empty_object.json", "sampled.json"]);
}

#[test]
fn window_seeds() {
    let mut resolved = Vec::new();
    for (name, text) in seeds("window_spec") {
        if let Ok(w) = text.parse::<AnalysisWindow>() {
            assert_eq!(w.to_string().parse::<AnalysisWindow>().unwrap(), w);
            if let Ok(r) = w.resolve(150) {
                assert!(*r.start() >= 1 && r.start() <= r.end() && *r.end() <= 150);
                resolved.push(name);
            }
        }
    }
    assert_eq!(resolved, ["first.txt", "last.txt", "range.txt"]);
}
