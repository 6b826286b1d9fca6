//! End-to-end runs of the `spectral-transfer` binary.

use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spectral-transfer"));
    c.args(args)
        .env_remove("SPECTRAL_TRANSFER_ROOT")
        .env_remove("SPECTRAL_TRANSFER_CONFIG")
        .env_remove("SPECTRAL_TRANSFER_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    cli(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

fn synth(dir: &Path, scenes: &str) -> String {
    ok(&["synth", "--scenes", scenes, "--seed", "3", "--bands", "16", "--out", &p(dir)]);
    p(&dir.join("manifest.json"))
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("file exists")).expect("valid json")
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["transfer", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["transfer", "--manifest", "m.json", "--out", "o", "--matcher", "file"]).status.code(), Some(2));
}

#[test]
fn missing_manifest_is_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["transfer", "--manifest", &p(&dir.path().join("nope.json")), "--out", &p(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("json error line");
    let msg = err["error"].as_str().unwrap();
    assert!(msg.contains("nope.json"), "{msg}");
    assert_eq!(msg.matches("os error").count(), 1, "{msg}");
}

#[test]
fn transfer_evaluate_report_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("data"), "3");
    let lt = dir.path().join("lt");
    let ma = dir.path().join("ma");
    ok(&["transfer", "--manifest", &manifest, "--out", &p(&lt)]);
    ok(&["transfer", "--manifest", &manifest, "--out", &p(&ma), "--mode", "ma"]);

    let record = read_json(&lt.join("run.json"));
    assert_eq!(record["summary"]["ok"], 3);
    let artifacts: Vec<&str> = record["artifacts"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
    assert!(artifacts.contains(&"s0000.png") && artifacts.contains(&"s0000.json"), "{artifacts:?}");
    assert!(record["config"].is_object());

    for (name, pred) in [("LT", &lt), ("MA", &ma)] {
        let out = dir.path().join(format!("eval_{name}"));
        ok(&["evaluate", "--pred", &p(pred), "--manifest", &manifest, "--method", name, "--out", &p(&out)]);
        let eval = read_json(&out.join("eval.json"));
        assert_eq!(eval["evaluated"], 3);
        assert!(eval["miou"].as_f64().unwrap() > 0.0);
    }
    let table = run(&[
        "report",
        "--eval",
        &p(&dir.path().join("eval_LT/eval.json")),
        "--eval",
        &p(&dir.path().join("eval_MA/eval.json")),
    ]);
    assert!(table.status.success());
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("LT") && text.contains("MA") && text.contains("mIoU"), "{text}");
}

#[test]
fn all_failed_samples_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let manifest = synth(&data, "2");
    for e in std::fs::read_dir(data.join("cube")).unwrap() {
        std::fs::remove_file(e.unwrap().path()).unwrap();
    }
    let out_dir = dir.path().join("lt");
    let out = run(&["transfer", "--manifest", &manifest, "--out", &p(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    let record = read_json(&out_dir.join("run.json"));
    assert_eq!(record["summary"]["failed"], 2);
    assert!(record["samples"][0]["error"].as_str().unwrap().contains("cube"));

    // nothing to score
    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let out = run(&["evaluate", "--pred", &p(&empty), "--manifest", &manifest]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn relative_outputs_land_under_the_root_variable() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["synth", "--scenes", "1", "--bands", "8", "--out", "rel"])
        .env("SPECTRAL_TRANSFER_ROOT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("rel/manifest.json").exists());
}

#[test]
fn config_file_sets_stage_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"version": 1, "synth": {"bands": 6, "min_objects": 1, "max_objects": 2}}"#).unwrap();
    let data = dir.path().join("data");
    ok(&["--config", &p(&cfg), "synth", "--scenes", "1", "--out", &p(&data)]);
    let hdr = std::fs::read_to_string(data.join("cube/s0000.hdr")).unwrap();
    assert!(hdr.lines().any(|l| l.replace(' ', "") == "bands=6"), "{hdr}");

    std::fs::write(&cfg, r#"{"version": 7}"#).unwrap();
    let out = run(&["--config", &p(&cfg), "synth", "--scenes", "1", "--out", &p(&data)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pca_fit_and_apply() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("data"), "2");
    let model_dir = dir.path().join("pca");
    ok(&["pca-fit", "--manifest", &manifest, "--out", &p(&model_dir), "--k", "3", "--max-samples", "2000"]);
    let model = read_json(&model_dir.join("pca_model.json"));
    assert_eq!(model["k"], 3);
    let applied = dir.path().join("hyper3");
    ok(&[
        "pca-apply",
        "--manifest",
        &manifest,
        "--model",
        &p(&model_dir.join("pca_model.json")),
        "--out",
        &p(&applied),
    ]);
    assert!(applied.join("s0000.hdr").exists() && applied.join("s0000.png").exists());
    ok(&[
        "transfer",
        "--manifest",
        &manifest,
        "--out",
        &p(&dir.path().join("lt_pc")),
        "--projection",
        "first-component",
        "--model",
        &p(&model_dir.join("pca_model.json")),
    ]);
}
