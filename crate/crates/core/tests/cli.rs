use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn monotrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monotrack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn codebook_json_document() {
    let cfg = example("static_offset.json");
    let o = monotrack(&["codebook", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["mra_u"].as_array().unwrap().len(), 8);
    assert_eq!(doc["beams"][4][7]["re"], 1.0);
}

#[test]
fn track_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let cfg = example("static_offset.json");
    let o = monotrack(&["track", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("step,t_s,true_u,rx_beam,mra_u,error,rssi_db,converged,track_lost\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("trace.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["iterations_to_converge"], 3);
    assert_eq!(summary["track_losses"], 0);
}

#[test]
fn track_is_reproducible_and_seed_overrides() {
    let cfg = example("static_offset.json");
    let run = |seed: &str| monotrack(&["track", "--config", cfg.to_str().unwrap(), "--format", "json", "--seed", seed]);
    let a = run("17");
    let b = run("17");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(doc["summary"]["seed"], 17);
}

#[test]
fn pattern_selected_beams() {
    let cfg = example("static_offset.json");
    let o = monotrack(&["pattern", "--config", cfg.to_str().unwrap(), "--beams", "0,4", "--points", "8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u,beam_0,beam_4");
    assert_eq!(lines.len(), 9);
    let row: Vec<f64> = lines[5].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!((row[0], row[2]), (0.0, 0.0));
    assert!(row[1] < -100.0);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"tx": {"n_elements": 8}, "rx": {"n_elements": 8}, "channel": {"kind": "static", "paths": []}, "typo": 1}"#)
        .unwrap();
    let o = monotrack(&["track", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"], "config");

    let missing = dir.path().join("missing.json");
    assert_eq!(monotrack(&["codebook", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    let cfg = example("static_offset.json");
    let o = monotrack(&["pattern", "--config", cfg.to_str().unwrap(), "--beams", "9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = monotrack(&["montecarlo", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
}
