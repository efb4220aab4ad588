mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::write_model;
use cvqd_cli::config::read_json;
use cvqd_cli::report::{OracleLevel, ScreeningReport};

fn cvqd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvqd")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_data_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = cvqd(&["gen-data", "--noise", "12", "--data-seed", "1", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(a.with_extension("model.json")).unwrap(), fs::read(b.with_extension("model.json")).unwrap());
    assert_eq!(fs::read_to_string(&a).unwrap().lines().count(), 1 + 4096);
}

#[test]
fn planted_model_oracle_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let model = dir.path().join("m.json");
    let o = cvqd(&["gen-data", "--out", s(&data), "--model-out", s(&model)]);
    assert!(o.status.success());
    let out = dir.path().join("oracle");
    let o = cvqd(&["oracle", "--model", s(&model), "--k", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<OracleLevel> = read_json(&out.join("oracle.json")).unwrap();
    assert_eq!(rows[0].bitstring, "110011001110");
    assert!(fs::read_to_string(out.join("oracle.csv"))
        .unwrap()
        .starts_with("rank,level,bitstring,groups,energy,score"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());

    let o = cvqd(&["oracle", "--model", s(&model), "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<OracleLevel> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.len(), 2);

    let missing = dir.path().join("nope.json");
    assert_eq!(cvqd(&["solve", "--model", s(&missing)]).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"k\": 3, \"unknown\": 1}").unwrap();
    assert_eq!(cvqd(&["deflate", "--config", s(&bad), "--model", s(&model)]).status.code(), Some(2));

    let o = cvqd(&["solve", "--model", s(&model), "--readout-noise", "0.1"]);
    assert_eq!(o.status.code(), Some(2), "readout noise on the exact backend");

    let o = cvqd(&["solve", "--model", s(&model), "--shots", "100", "--readout-noise", "1.5"]);
    assert_eq!(o.status.code(), Some(2), "flip probability out of range");

    let conf = dir.path().join("conf.json");
    let qubits: Vec<_> = (0..4).map(|_| serde_json::json!({"p01": 0.5, "p10": 0.5})).collect();
    fs::write(&conf, serde_json::json!({ "qubits": qubits }).to_string()).unwrap();
    let o = cvqd(&["solve", "--model", s(&model), "--shots", "200", "--mitigation", s(&conf)]);
    assert_eq!(o.status.code(), Some(2), "singular calibration is rejected on load");

    let data = dir.path().join("d.csv");
    assert!(cvqd(&["gen-data", "--out", s(&data)]).status.success());
    let fm = dir.path().join("fm.json");
    let o = cvqd(&["train", "--dataset", s(&data), "--out", s(&fm), "--learning-rate", "1e6", "--epochs", "5"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let cfg = dir.path().join("run.json");
    let doc = serde_json::json!({
        "model": model,
        "k": 3,
        "mode": "vqd",
        "optimizer": { "kind": "simplex", "max_iter": 500, "seed": 9, "restarts": 2,
                       "spsa": { "a": 0.2, "c": 0.1, "alpha": 0.602, "gamma": 0.101, "big_a": 50.0 },
                       "x_tol": 1e-6, "f_tol": 1e-9, "simplex_step": 0.5, "init_range": 0.1,
                       "restart_range": 3.0 }
    });
    fs::write(&cfg, doc.to_string()).unwrap();
    let out = dir.path().join("run");
    let o = cvqd(&["deflate", "--config", s(&cfg), "--k", "1", "--seed", "4", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: ScreeningReport = read_json(&out.join("report.json")).unwrap();
    assert_eq!(r.levels.len(), 2, "flag k wins");
    assert_eq!(r.metadata.k, 1);
    assert_eq!(r.metadata.optimizer_seed, 4, "flag seed wins");
    assert_eq!(serde_json::to_value(r.metadata.mode).unwrap(), "vqd", "config mode kept");
    let levels = fs::read_to_string(out.join("levels.csv")).unwrap();
    assert_eq!(levels.lines().count(), 3);
    assert!(fs::read_to_string(out.join("trace.csv")).unwrap().starts_with("rank,iteration,objective"));
}
