use std::path::PathBuf;
use std::process::{Command, Output};

use linform::poisson::{empirical_count_law, stein_chen_bounds, tv_to_poisson};
use linform::sim::{self, ExperimentConfig};
use linform::theory::{critical_coefficients, predict};
use linform::{count_all_offsets, LinearForm, RegimeSpec};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linform")).args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn form(c: &[i64]) -> LinearForm {
    LinearForm::new(c).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("linform-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn predict_difference_set_complement() {
    let v = json_ok(&["predict", "--form", "1,-1", "--alpha", "0.4", "--N", "1e6"]);
    let p = 1e6f64.powf(-0.4);
    let complement = &v["predictions"][1];
    assert_eq!(complement["quantity"], "complement_size");
    let value = complement["value"].as_f64().unwrap();
    assert!((value / (2.0 / (p * p)) - 1.0).abs() < 1e-12);
    assert_eq!(complement["tag"], "supercritical_complement");
    assert_eq!(v["predictions"][0]["value"], Value::Null);

    let regime = RegimeSpec::new(1.0, "0.4".parse().unwrap(), 2).unwrap();
    let lib = predict(&form(&[1, -1]), &regime, 1_000_000).unwrap();
    assert_eq!(value, lib[1].value.unwrap());
}

#[test]
fn predict_critical_coefficients_sum_to_range() {
    let v = json_ok(&["predict", "--form", "1,1", "--critical-c", "1"]);
    let c = &v["coefficients"];
    let sum = c["image_coeff"].as_f64().unwrap() + c["complement_coeff"].as_f64().unwrap();
    assert!((sum - 2.0).abs() < 1e-12);
    let lib = critical_coefficients::<f64>(&form(&[1, 1]), 1.0).unwrap();
    assert_eq!(c["complement_coeff"].as_f64().unwrap(), lib.complement_coeff);
}

#[test]
fn predict_rejects_two_regimes() {
    let out = run(&["predict", "--form", "1,1", "--alpha", "0.5", "--critical-c", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exactly one of --alpha and --critical-c"));
}

#[test]
fn enumerate_lists_and_counts() {
    let v = json_ok(&["enumerate", "--form", "1,1", "--N", "2", "--k", "2"]);
    assert_eq!(v["count"], 2);
    let reps: Vec<&Value> = v["classes"].as_array().unwrap().iter().map(|c| &c["rep"]).collect();
    assert_eq!(reps, [&serde_json::json!([0, 2]), &serde_json::json!([1, 1])]);

    let v = json_ok(&["enumerate", "--form", "1,1", "--N", "2", "--k", "99", "--count-only"]);
    assert_eq!(v["count"], 0);
}

#[test]
fn enumerate_all_offsets_table_is_symmetric() {
    let out = run(&["enumerate", "--form", "2,1,-1", "--N", "7", "--all-k", "--count-only"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,exact_count,lambda_k_scaled,rel_error");
    let counts: Vec<u64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(counts.len(), 4 * 7 + 1);
    let rev: Vec<u64> = counts.iter().rev().copied().collect();
    assert_eq!(counts, rev);
    let lib: Vec<u64> = count_all_offsets(&form(&[2, 1, -1]), 7).iter().map(|c| c.try_into().unwrap()).collect();
    assert_eq!(counts, lib);
}

#[test]
fn enumerate_refuses_oversized_listing() {
    let out = run(&["enumerate", "--form", "1,1,1,1", "--N", "40", "--k", "80", "--cap", "1000"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--count-only"));
    let v = json_ok(&["enumerate", "--form", "1,1,1,1", "--N", "40", "--k", "80", "--count-only"]);
    assert!(v["count"].as_u64().unwrap() > 1000);
}

#[test]
fn count_reports_image_and_representations() {
    let v = json_ok(&["count", "--form", "1,1", "--N", "10", "--elements", "0,1,5", "--k", "2,10"]);
    // A + A = {0,1,2,5,6,10}
    assert_eq!(v["image_size"], 6);
    assert_eq!(v["complement_size"], 21 - 6);
    assert_eq!(v["w"]["2"], 1);
    assert_eq!(v["w"]["10"], 1);
    assert_eq!(v["seed"], Value::Null);
}

#[test]
fn omitted_seed_is_printed() {
    let out = run(&["count", "--form", "1,-1", "--N", "50", "--p", "0.3"]);
    assert!(out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    let printed: u64 = stderr.lines().find_map(|l| l.strip_prefix("seed: ")).unwrap().parse().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"].as_u64().unwrap(), printed);
    let again = json_ok(&["count", "--form", "1,-1", "--N", "50", "--p", "0.3", "--seed", &printed.to_string()]);
    assert_eq!(again, v);
}

#[test]
fn sweep_matches_library_and_emits_plot() {
    let dir = scratch("sweep");
    let cfg_path = dir.join("cfg.json");
    let cfg = serde_json::json!({
        "schema": 1,
        "form": [1, 1, -1],
        "n_values": [200, 1e3],
        "c_values": [1.0],
        "alpha_values": ["1/2", 0.8],
        "trials": 4,
        "master_seed": 99,
        "quantities": ["image_size", "complement_size", "w_k"],
        "k_values": ["mid"],
        "output": { "trials_csv": dir.join("out/trials.csv"), "summary_json": dir.join("out/summary.json") }
    });
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = run(&["sweep", cfg_path.to_str().unwrap(), "--emit-plot", "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("supercritical"));

    let written = std::fs::read(dir.join("out/trials.csv")).unwrap();
    let lib_cfg = ExperimentConfig::load(&cfg_path).unwrap();
    let res = sim::sweep(&lib_cfg).unwrap();
    let cells: Vec<_> = res.cells.iter().map(|c| c.cell).collect();
    let mut expected = Vec::new();
    sim::write_trials_csv(res.records(), &cells, &mut expected).unwrap();
    assert_eq!(written, expected);

    let script = std::fs::read_to_string(dir.join("out/plot_trials.py")).unwrap();
    assert!(script.contains("HERE / \"trials.csv\""));
    assert!(!script.contains(dir.to_str().unwrap()));
}

#[test]
fn simulate_writes_default_files() {
    let dir = scratch("simulate");
    let out = run(&[
        "simulate", "--form", "1,-1", "--N", "500", "--alpha", "0.4", "--trials", "3", "--seed", "5", "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["master_seed"], 5);
    let csv = std::fs::read_to_string(dir.join("trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn missing_config_names_the_path() {
    let out = run(&["sweep", "/definitely/not/here.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here.json"));
}

#[test]
fn failing_cells_give_nonzero_exit() {
    let dir = scratch("fail");
    let out = run(&[
        "simulate", "--form", "1,1", "--N", "10", "--c", "100", "--alpha", "0.5", "--trials", "2", "--seed", "1",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cell 0"));
}

#[test]
fn poisson_matches_library() {
    let v = json_ok(&["poisson", "--form", "1,1,1", "--N", "300", "--alpha", "0.8", "--trials", "2000", "--seed", "3"]);
    let f = form(&[1, 1, 1]);
    let p = 300f64.powf(-0.8);
    // constant folding may round the power differently, so compare to within one ulp
    assert!((v["p"].as_f64().unwrap() - p).abs() <= f64::EPSILON * p);
    let p = v["p"].as_f64().unwrap();
    let acc = stein_chen_bounds::<f64>(&f, 300, 450, &p).unwrap();
    let pmf = empirical_count_law(&f, 300, 450, p, 2000, 3).unwrap();
    assert_eq!(v["k"], 450);
    assert_eq!(v["mu"].as_f64().unwrap(), acc.mu);
    assert_eq!(v["upper_bound"].as_f64().unwrap(), acc.upper_bound());
    assert_eq!(v["tv"].as_f64().unwrap(), tv_to_poisson(&pmf, acc.mu));
}

#[test]
fn poisson_certificate_above_threshold() {
    let v = json_ok(&["poisson", "--form", "1,1,1", "--N", "12", "--alpha", "0.3", "--trials", "100", "--seed", "3"]);
    assert!(v["lower_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(v["certificate"]["source"], "exhaustive");
}

#[test]
fn zero_trials_is_a_usage_error() {
    let out = run(&["poisson", "--form", "1,1,1", "--N", "100", "--alpha", "0.4", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mstd_and_identity_check_run() {
    let v = json_ok(&["mstd", "--N", "30", "--p", "0.5", "--trials", "200", "--seed", "8"]);
    assert_eq!(v["report"]["trials"], 200);
    let rows = json_ok(&["identity-check"]);
    assert_eq!(rows.as_array().unwrap().len(), 12);
    assert!(rows.as_array().unwrap().iter().all(|r| r["residual"].as_f64().unwrap() < 1e-6));
}

#[test]
fn unknown_flags_are_errors() {
    let out = run(&["predict", "--form", "1,1", "--critical-c", "1", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}
