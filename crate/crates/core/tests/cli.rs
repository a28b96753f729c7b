use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_feynman-index");

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("feynman-index-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn invoke(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("FEYNMAN_INDEX_OUT");
    if let Some(o) = env_out {
        cmd.env("FEYNMAN_INDEX_OUT", o);
    }
    cmd.output().unwrap()
}

const SMALL_ETA: &str = r#"{"eta": {"fluxes": ["0.25", "0.6"], "k": 100}}"#;

#[test]
fn eta_run_writes_stable_report() {
    let dir = scratch("eta");
    let cfg = write_config(&dir, SMALL_ETA);
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    for out in [&out1, &out2] {
        let o = invoke(&["eta", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let r1 = fs::read(out1.join("report.json")).unwrap();
    assert_eq!(r1, fs::read(out2.join("report.json")).unwrap());
    assert_eq!(fs::read(out1.join("eta.csv")).unwrap(), fs::read(out2.join("eta.csv")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&r1).unwrap();
    assert_eq!(v["schema"], "feynman-index/report/v1");
    assert_eq!(v["pass"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 6);
    assert!(out1.join("timing.json").exists());
    let text = String::from_utf8(r1).unwrap();
    assert!(text.contains("\"tolerance\": 1.0000000000000000e-3"));
}

#[test]
fn failing_check_gives_nonzero_exit() {
    let dir = scratch("fail");
    let cfg = write_config(&dir, r#"{"eta": {"fluxes": ["0.25"], "k": 60, "tolerance": 1e-30}}"#);
    let o = invoke(&["xi", "--config", cfg.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("o/report.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn config_errors_name_the_field() {
    let dir = scratch("config");
    let cfg = write_config(&dir, r#"{"command": "index"}"#);
    let o = invoke(&["eta", "--config", cfg.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("CONFIG_INVALID") && err.contains("`command`"), "{err}");

    let cfg = write_config(&dir, r#"{"index": {"paths": [{"a_minus": "0.3", "a_plus": "x", "expected_index": 1}]}}"#);
    let o = invoke(&["index", "--config", cfg.to_str().unwrap()], None);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("index.paths[0].a_plus"), "{err}");

    let o = invoke(&["nonsense", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_can_come_from_environment() {
    let dir = scratch("env");
    let cfg = write_config(&dir, SMALL_ETA);
    let env_out = dir.join("from-env");
    let o = invoke(&["eta", "--config", cfg.to_str().unwrap(), "--out", dir.join("flag").to_str().unwrap()], Some(&env_out));
    assert!(o.status.success());
    assert!(env_out.join("report.json").exists());
    assert!(!dir.join("flag").exists());
}

#[test]
fn seed_is_recorded() {
    let dir = scratch("seed");
    let cfg = write_config(&dir, r#"{"projectors": {"random_matrices": 5}, "propagator": {"levels": 2, "nodes": 41}}"#);
    let out = dir.join("o");
    let o = invoke(
        &["propagator-check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "99"],
        None,
    );
    assert!(o.status.code().is_some());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 99);
    assert!(out.join("frequency_splitting.csv").exists());
}
