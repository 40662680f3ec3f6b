use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const CONFIG: &str = r#"
seed = 3
output_dir = "out"

[synth.population]
n_records = 3000

[synth.population.drift]
income_inflation = 1.1
new_code_rate = 0.05
new_code_start = "2011-01"

[inflation]
mode = "synth-deflators"

[evaluation]
cv_k = 3
"#;

fn scorecard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scorecard")).args(args).output().expect("binary runs")
}

fn summary(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(stdout.lines().count(), 1, "one summary line expected, got {stdout}");
    let v: Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(v["status"], "ok");
    v
}

fn setup(extra: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("{CONFIG}{extra}")).unwrap();
    (dir, cfg)
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

#[test]
fn pipeline_writes_every_stage() {
    let (dir, cfg) = setup("");
    let v = summary(&scorecard(&["pipeline", "-c", cfg.to_str().unwrap()]));
    assert_eq!(v["command"], "pipeline");
    let out = dir.path().join("out");
    for f in [
        "synth/applications.csv",
        "ingest/modeling.csv",
        "ingest/holdout.csv",
        "bin/characteristics.txt",
        "train/model.txt",
        "evaluate/metrics.csv",
        "evaluate/scores.csv",
        "calibrate/forecast.csv",
        "calibrate/calibrated_scores.csv",
        "report/report.json",
        "report/scorecard.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert!(files(&out).iter().all(|p| !p.to_string_lossy().contains(".tmp")));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report/report.json")).unwrap()).unwrap();
    let auc = report["metrics"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["section"] == "holdout" && m["name"] == "auc")
        .and_then(|m| m["value"].as_f64())
        .unwrap();
    assert!(auc > 0.55 && auc < 1.0, "holdout auc {auc}");
}

#[test]
fn stages_one_by_one_match_pipeline() {
    let (dir, cfg) = setup("");
    let c = cfg.to_str().unwrap();
    let whole = dir.path().join("whole");
    let steps = dir.path().join("steps");
    summary(&scorecard(&["pipeline", "-c", c, "--output-dir", whole.to_str().unwrap()]));
    for cmd in ["synth", "ingest", "bin", "train", "evaluate", "calibrate", "report"] {
        let v = summary(&scorecard(&[cmd, "-c", c, "--output-dir", steps.to_str().unwrap()]));
        assert_eq!(v["command"], cmd);
    }
    let a = files(&whole);
    assert_eq!(a, files(&steps));
    for f in &a {
        assert!(fs::read(whole.join(f)).unwrap() == fs::read(steps.join(f)).unwrap(), "{} differs", f.display());
    }
}

#[test]
fn tab_delimited_run() {
    let (dir, cfg) = setup("");
    summary(&scorecard(&["pipeline", "-c", cfg.to_str().unwrap(), "--delimiter", "tab"]));
    let scores = fs::read_to_string(dir.path().join("out/evaluate/scores.csv")).unwrap();
    assert!(scores.starts_with("id\tapplication_date\tlabel\tscore\n"));
}

#[test]
fn evaluate_degradation_only() {
    let v = summary(&scorecard(&["evaluate", "--test-auc", "0.7320", "--holdout-auc", "0.7227"]));
    assert_eq!(v["degradation"].as_f64().unwrap(), 0.93);
}

#[test]
fn constant_forecast_with_uplift() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let v = summary(&scorecard(&["forecast", "--scenario", "3", "--constant", "0.293", "--output-dir", out]));
    let rates: Vec<f64> = v["rates"].as_array().unwrap().iter().map(|r| r.as_f64().unwrap()).collect();
    assert_eq!(rates.len(), 12);
    for r in &rates[..10] {
        assert!((r - 0.293).abs() <= 1e-12);
    }
    for r in &rates[10..] {
        assert!((r - 0.29593).abs() <= 1e-12);
    }
    assert!(dir.path().join("forecast/forecast.csv").is_file());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(scorecard(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(scorecard(&["forecast", "--scenario", "4"]).status.code(), Some(2));
    assert_eq!(scorecard(&["evaluate", "--test-auc", "0.7"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = scorecard(&["train", "--data", "/nonexistent.csv", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(err["status"], "error");
    assert_eq!(err["command"], "train");

    let (_d, cfg) = setup("\n[modeling]\nno_such_key = 1\n");
    let out = scorecard(&["bin", "-c", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("\"status\":\"error\"") && err.contains("no_such_key"), "{err}");
}

#[test]
fn bad_rows_are_reported_not_fatal() {
    let (dir, cfg) = setup("");
    let c = cfg.to_str().unwrap();
    summary(&scorecard(&["synth", "-c", c]));
    let apps = dir.path().join("out/synth/applications.csv");
    let mut text = fs::read_to_string(&apps).unwrap();
    text.push_str("broken,row\n");
    let dirty = dir.path().join("dirty.csv");
    fs::write(&dirty, text).unwrap();
    let v = summary(&scorecard(&["ingest", "-c", c, "--data", dirty.to_str().unwrap()]));
    assert_eq!(v["diagnostics"].as_u64(), Some(1), "{v}");
    let diag = fs::read_to_string(dir.path().join("out/ingest/diagnostics.txt")).unwrap();
    assert!(diag.contains("line 3002"), "{diag}");
}
