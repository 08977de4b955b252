//! End-to-end tests of the command-line binary: exit codes, determinism and
//! report contents.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_regime-bounds"));
    c.env_remove(regime_bounds::cli::OUT_DIR_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn bounds_report_on_response_type_law() {
    let o = run(&["bounds", "--law", &fixture("sign_reversal.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let j = stdout_json(&o);
    let ate = &j["ate"];
    assert!(ate[0].as_f64().unwrap() < 0.0 && ate[1].as_f64().unwrap() > 0.0);
    assert!(j["cate_given_a"][0][1].as_f64().unwrap() < 0.0);
    assert!(j["cate_given_a"][1][0].as_f64().unwrap() > 0.0);
    assert_eq!(j["strata"][0]["status_given_a"], serde_json::json!(["IdentifiedControl", "IdentifiedTreat"]));
}

#[test]
fn liability_report_statuses() {
    let o = run(&["bounds", "--law", &fixture("liability_pz025.json"), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("stratum,quantity,lo,up,status\n"));
    let status = |q: &str| csv.lines().find(|l| l.starts_with(&format!("all,{q},"))).unwrap().rsplit(',').next().unwrap().to_string();
    assert_eq!(status("cate_l"), "IdentifiedControl");
    assert_eq!(status("cate_a0"), "Ambiguous");
    assert_eq!(status("cate_a1"), "IdentifiedControl");
}

#[test]
fn sensitivity_bounds_widen_with_gamma() {
    let width = |g: &str| {
        let o = run(&["bounds", "--law", &fixture("two_strata.json"), "--gamma", g]);
        assert_eq!(code(&o), 0);
        let ate = stdout_json(&o)["ate"].clone();
        ate[1].as_f64().unwrap() - ate[0].as_f64().unwrap()
    };
    let (w1, w2, w3) = (width("1"), width("2"), width("inf"));
    assert!(w1.abs() < 1e-12 && w1 <= w2 && w2 <= w3);
}

#[test]
fn oracle_check_passes_and_reports_infeasible_law() {
    assert_eq!(code(&run(&["oracle-check", "--law", &fixture("sign_reversal.json")])), 0);
    assert_eq!(code(&run(&["oracle-check", "--law", &fixture("liability_pz010.json")])), 0);
    let dir = tempfile::tempdir().unwrap();
    // violates the instrument inequality: Σ_y max_z P(y, A=0 | z) = 1.2
    let law = write(
        dir.path(),
        "bad.json",
        r#"{"strata":[{"label":"all","weight":1,"lambda":0.5,"p":[[[0.6,0.1],[0.15,0.15]],[[0.1,0.6],[0.15,0.15]]]}]}"#,
    );
    let o = run(&["oracle-check", "--law", law.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_csv = write(dir.path(), "bad.csv", "y,a,z\n1,0,0\n1,2,0\n");
    let o = run(&["ci", "--data", bad_csv.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));

    let header = write(dir.path(), "header.csv", "a,y,z\n1,0,0\n");
    assert_eq!(code(&run(&["ci", "--data", header.to_str().unwrap(), "--seed", "1"])), 2);

    let bad_json = write(dir.path(), "law.json", "{\"strata\": [\n{\"label\": 1}]}");
    let o = run(&["bounds", "--law", bad_json.to_str().unwrap()]);
    assert_eq!(code(&o), 2);

    let good = dir.path().join("d.csv");
    assert_eq!(code(&run(&["simulate", "--law", &fixture("two_strata.json"), "--n", "500", "--seed", "1", "--out", good.to_str().unwrap()])), 0);
    let g = good.to_str().unwrap();
    assert_eq!(code(&run(&["value", "--data", g, "--criterion", "bogus", "--seed", "1"])), 2);
    assert_eq!(code(&run(&["value", "--data", g, "--criterion", "observed"])), 2, "seed is mandatory");
    assert_eq!(code(&run(&["simulate", "--law", &fixture("two_strata.json"), "--n", "0", "--seed", "1", "--out", g])), 2);
    assert_eq!(code(&run(&["bounds", "--law", &fixture("sign_reversal.json"), "--gamma", "0.5"])), 2);
    assert_eq!(code(&run(&["bounds", "--law", "/nonexistent/law.json"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["value", "--data", g, "--criterion", "observed", "--seed", "1", "--alpha", "1.5"])), 2);
}

#[test]
fn simulate_is_byte_identical_and_writes_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| {
        let p = dir.path().join(name);
        let o = run(&["simulate", "--law", &fixture("sign_reversal.json"), "--n", "100000", "--seed", "7", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        p
    };
    let (a, b) = (out("a.csv"), out("b.csv"));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let side: Value = serde_json::from_str(&std::fs::read_to_string(regime_bounds::cli::sidecar_path(&a)).unwrap()).unwrap();
    assert!((side["truth"]["ate"].as_f64().unwrap() + 0.514).abs() <= 0.0005);
    assert_eq!(regime_bounds::estimation::Dataset::read_csv(&a).unwrap().len(), 100_000);
}

#[test]
fn simulate_uses_env_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env(regime_bounds::cli::OUT_DIR_ENV, dir.path())
        .args(["simulate", "--gamma", "2", "--n", "200", "--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("simulated.csv").exists());
    assert!(dir.path().join("simulated.truth.json").exists());
}

#[test]
fn value_matches_population_bounds_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let d = data.to_str().unwrap();
    assert_eq!(code(&run(&["simulate", "--law", &fixture("two_strata.json"), "--n", "20000", "--seed", "3", "--out", d])), 0);
    let truth: Value = serde_json::from_str(&std::fs::read_to_string(regime_bounds::cli::sidecar_path(&data)).unwrap()).unwrap();
    for c in ["optimist", "healthcare", "conventionality-sup"] {
        let o = run(&["value", "--data", d, "--criterion", c, "--seed", "1"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let j = stdout_json(&o);
        let pop = &truth["bounds"]["regime_values"][c];
        for (side, k) in [("lower", 0), ("upper", 1)] {
            let est = j[side]["point"].as_f64().unwrap();
            assert!((est - pop[k].as_f64().unwrap()).abs() < 0.02, "{c} {side}: {est} vs {}", pop[k]);
        }
        assert_eq!(o.stdout, run(&["value", "--data", d, "--criterion", c, "--seed", "1"]).stdout);
    }
    let o = run(&["value", "--data", d, "--criterion", "observed", "--seed", "1", "--format", "csv"]);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("criterion,side,point,se,ci_lo,ci_up\n"));
    let ybar = regime_bounds::estimation::Dataset::read_csv(&data).unwrap().mean_y();
    let point: f64 = csv.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((point - ybar).abs() < 1e-12);
}

#[test]
fn value_with_regime_file_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let d = data.to_str().unwrap();
    assert_eq!(code(&run(&["simulate", "--law", &fixture("two_strata.json"), "--n", "4000", "--seed", "5", "--out", d])), 0);
    let regime = write(dir.path(), "g.json", r#"{"0": {"a0": 1, "a1": 1}, "1": {"a0": 0, "a1": 0}}"#);
    let cfg = write(dir.path(), "cfg.json", r#"{"boot": 100, "folds": 5, "seed": 4}"#);
    let o = run(&["value", "--data", d, "--regime", regime.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let j = stdout_json(&o);
    assert_eq!(j["folds"], 5);
    assert_eq!(j["lower"]["n_boot"], 100);
    let bad_cfg = write(dir.path(), "bad.json", r#"{"bootstraps": 100}"#);
    assert_eq!(code(&run(&["value", "--data", d, "--criterion", "observed", "--config", bad_cfg.to_str().unwrap()])), 2);
}

#[test]
fn ci_and_dataset_bounds_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let d = data.to_str().unwrap();
    assert_eq!(code(&run(&["simulate", "--law", &fixture("two_strata.json"), "--n", "5000", "--seed", "8", "--out", d])), 0);
    let o = run(&["ci", "--data", d, "--seed", "2", "--boot", "100"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let j = stdout_json(&o);
    for t in ["ey0", "ey1", "ate"] {
        let b = &j[t]["bounds"];
        let ci = &j[t]["ci"];
        assert!(ci[0].as_f64().unwrap() <= b[0].as_f64().unwrap() && b[1].as_f64().unwrap() <= ci[1].as_f64().unwrap());
    }
    let out = dir.path().join("report.json");
    let o = run(&["bounds", "--data", d, "--seed", "2", "--boot", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(written, j);
}
