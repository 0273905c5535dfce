use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn small_config() -> Value {
    json!({
        "horizon": { "last_day": 6 },
        "classes": { "count": 2, "scheme": { "kind": "custom", "classes": [[0, 2, 4, 6], [1, 3, 5]] } },
        "grids": {
            "capacity": [0.0, 100.0, 200.0],
            "health_budget": (0..=16).map(|i| 50.0 * i as f64).collect::<Vec<_>>(),
            "aging_price": [0.0, 0.1, 0.2],
            "soc_points": 5,
            "control_points": 5
        },
        "battery": { "max_renewal": 200.0, "renewal_grid": [0.0, 100.0, 200.0] },
        "data": { "raw_scenarios": 4 },
        "simulate": { "scenarios": 8 },
        "verify": { "instances": 5 }
    })
}

fn write_config(dir: &Path, cfg: &Value) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn twoscale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoscale")).args(args).output().unwrap()
}

fn run_in(dir: &Path, cfg: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    twoscale(&all)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bellman_without_intraday_tables_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let out = tmp.path().join("out");
    assert!(run_in(&out, &cfg, &["fit"]).status.success());
    let o = run_in(&out, &cfg, &["bellman"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("intraday tables missing"), "{}", stderr(&o));
}

#[test]
fn stages_run_in_sequence_and_record_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let out = tmp.path().join("out");
    for stage in ["fit", "intraday", "bellman", "simulate", "report"] {
        let o = run_in(&out, &cfg, &[stage]);
        assert!(o.status.success(), "{stage}: {}", stderr(&o));
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let hash = manifest["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    for stage in ["fit", "intraday", "bellman", "simulate", "report"] {
        assert_eq!(manifest["stages"][stage]["config_hash"], hash, "{stage}");
    }
    for f in [
        "fit/price_law.json",
        "fit/noise_class1_slot0.json",
        "intraday/intraday_R_class1.json",
        "intraday/intraday_P_class2.json",
        "bellman/bellman_P_d0.json",
        "bellman/bellman_R_d7.json",
        "simulate/simulation_price.csv",
        "simulate/simulation_resource.json",
        "report/report.json",
        "report/gap_series.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("simulate/simulation_price.csv")).unwrap();
    assert!(csv.starts_with("scenario_id,total_cost,renewal_days,renewal_sizes\n"));
    assert_eq!(csv.lines().count(), 9);

    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report/report.json")).unwrap()).unwrap();
    assert_eq!(report["sandwich_violations"], 0);
    assert!(report["lower_x0"].as_f64().unwrap() <= report["upper_x0"].as_f64().unwrap());
}

#[test]
fn changed_config_needs_force() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut cfg = small_config();
    let path = write_config(tmp.path(), &cfg);
    assert!(run_in(&out, &path, &["fit"]).status.success());
    assert!(run_in(&out, &path, &["intraday"]).status.success());

    cfg["seed"] = json!(7);
    let path = write_config(tmp.path(), &cfg);
    let o = run_in(&out, &path, &["bellman"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = run_in(&out, &path, &["--force", "bellman"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn bad_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["horizon"]["steps_per_day"] = json!(24);
    let path = write_config(tmp.path(), &cfg);
    let o = run_in(&tmp.path().join("out"), &path, &["fit"]);
    assert_eq!(o.status.code(), Some(2));

    let mut cfg = small_config();
    cfg["classes"] = json!({ "count": 4, "scheme": { "kind": "trimester" } });
    let path = write_config(tmp.path(), &cfg);
    let o = run_in(&tmp.path().join("out"), &path, &["fit"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let path = tmp.path().join("typo.json");
    std::fs::write(&path, r#"{"sede": 1}"#).unwrap();
    let o = run_in(&tmp.path().join("out"), &path, &["fit"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn complexity_prints_the_ratios() {
    let o = twoscale(&["complexity", "--D", "7300", "--M", "48", "--I", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("R^R")).unwrap();
    let ratio: f64 = line["R^R = I/D + 1/M".len()..].split_whitespace().next().unwrap().parse().unwrap();
    assert!((ratio - 1.0 / 50.0).abs() <= 0.1 / 50.0, "{line}");
    let o = twoscale(&["complexity", "--D", "0", "--M", "48", "--I", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_on_seeded_instances() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let out = tmp.path().join("out");
    let o = run_in(&out, &cfg, &["verify", "--instances", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["failures"] == 0 && r["instances"] == 20));
}

#[test]
fn init_config_writes_a_loadable_config() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("cfg.json");
    let o = twoscale(&["--seed", "11", "init-config", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["horizon"]["last_day"], 365);
}
