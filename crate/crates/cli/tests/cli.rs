use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bpflux(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpflux"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = bpflux(args);
    assert!(
        out.status.success(),
        "bpflux {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn run_writes_report_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&[
        "run",
        "--problem",
        "burgers",
        "--scheme",
        "ssp54-gmc",
        "--n",
        "100",
        "--gamma",
        "1",
        "--tfinal",
        "0.5",
        "--out",
        out,
    ]);
    let report = read_json(&dir.path().join("report.json"));
    let e1 = report["e1"].as_f64().unwrap();
    assert!((e1 - 4.81e-6).abs() <= 0.1 * 4.81e-6, "E1 = {e1}");
    for key in ["delta", "mass_drift", "wall_time_seconds", "n_steps"] {
        assert!(report[key].is_number(), "missing {key}");
    }
    let profile = csv_rows(&dir.path().join("profile.csv"));
    assert_eq!(profile[0], ["x_center", "u"]);
    assert_eq!(profile.len(), 101);
}

#[test]
fn constant_data_stays_constant() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--problem",
        "advection-nonsmooth",
        "--constant",
        "0.3",
        "--n",
        "40",
        "--tfinal",
        "0.2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["delta"].as_f64(), Some(0.0));
    for row in &csv_rows(&dir.path().join("profile.csv"))[1..] {
        let u: f64 = row[1].parse().unwrap();
        assert!((u - 0.3).abs() < 1e-15);
    }
}

#[test]
fn too_few_cells_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bpflux(&["run", "--n", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"problem": "advection-smooth", "scheme": "rk76-gmc", "n_cells": 50, "final_time": 0.1}"#)
        .unwrap();
    let out = dir.path().join("out");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "60",
        "--out",
        out.to_str().unwrap(),
    ]);
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["n_cells"], 60);
    assert_eq!(report["scheme"], "rk76-gmc");
    assert_eq!(report["final_time"], 0.1);
    let saved = read_json(&out.join("config.json"));
    assert_eq!(saved["n_cells"], 60);
    assert_eq!(saved["scheme"], "rk76-gmc");
}

#[test]
fn semi_discrete_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "convergence",
        "--problem",
        "burgers-gaussian",
        "--scheme",
        "ssp54-baseline",
        "--semi-discrete",
        "--meshes",
        "25,50,100",
        "--jobs",
        "1",
        "--out",
        out,
    ];
    let first = run_ok(&args);
    let rows = csv_rows(&dir.path().join("convergence.csv"));
    assert_eq!(rows[0], ["N", "E1", "EOC", "delta"]);
    assert_eq!(rows[1][2], "");
    assert_eq!(rows[3][0], "100");
    assert_eq!(rows[3][1], "1.04e-06");
    let again = run_ok(&args);
    assert_eq!(first, again);
    assert_eq!(
        fs::read_to_string(dir.path().join("convergence.csv")).unwrap(),
        first
    );
}

#[test]
fn two_meshes_give_one_rate() {
    let dir = tempfile::tempdir().unwrap();
    let csv = run_ok(&[
        "convergence",
        "--problem",
        "advection-smooth",
        "--scheme",
        "rk76-baseline",
        "--tfinal",
        "0.1",
        "--meshes",
        "25,50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let rates: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(rates.iter().filter(|r| !r.is_empty()).count(), 1);
    let summary = read_json(&dir.path().join("convergence.json"));
    assert_eq!(summary["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_mesh_lists_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        bpflux(&["convergence", "--meshes", "50", "--out", out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bpflux(&["convergence", "--meshes", "50,25", "--out", out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bpflux(&["convergence", "--out", out]).status.code(),
        Some(2)
    );
}

#[test]
fn ssp_check_verdicts() {
    let out = bpflux(&["ssp-check", "--tableau", "ssp54", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("stages_ok: true") && text.contains("update_ok: true"));

    let out = bpflux(&["ssp-check", "--tableau", "exe-rk5", "--mu", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("stages_ok: true") && text.contains("update_ok: false"));

    assert_eq!(
        bpflux(&["ssp-check", "--tableau", "euler", "--mu", "10"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        bpflux(&["ssp-check", "--tableau", "rk4"]).status.code(),
        Some(2)
    );
}

#[test]
fn ssp_check_reads_tableau_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("heun.json");
    fs::write(
        &path,
        r#"{"name": "heun", "a": [[0, 0], [1, 0]], "b": [0.5, 0.5], "c": [0, 1]}"#,
    )
    .unwrap();
    let out = bpflux(&[
        "ssp-check",
        "--tableau",
        path.to_str().unwrap(),
        "--mu",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("tableau heun"));
}

#[test]
fn plot_data_with_exact_solution() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "plot-data",
        "--problem",
        "advection-nonsmooth",
        "--scheme",
        "ssp54-gmc",
        "--n",
        "200",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let rows = csv_rows(&dir.path().join("plot.csv"));
    assert_eq!(rows[0], ["x", "u_numerical", "u_exact"]);
    assert_eq!(rows.len(), 201);
}

#[test]
fn plot_data_without_exact_solution() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "plot-data",
        "--problem",
        "burgers",
        "--scheme",
        "ssp54-gmc",
        "--n",
        "50",
        "--tfinal",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let rows = csv_rows(&dir.path().join("plot.csv"));
    assert_eq!(rows[0], ["x", "u_numerical"]);
    assert!(rows.iter().all(|r| r.len() == 2));
}

#[test]
fn plot_data_joins_the_kpp_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("ref.csv");
    let args = [
        "plot-data",
        "--problem",
        "kpp",
        "--scheme",
        "ssp54-gmc",
        "--n",
        "400",
        "--tfinal",
        "0.1",
        "--reference-cells",
        "800",
        "--kpp-cache",
        cache.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ];
    run_ok(&args);
    assert!(cache.is_file());
    let rows = csv_rows(&dir.path().join("plot.csv"));
    assert_eq!(rows[0], ["x", "u_numerical", "u_reference"]);
    assert_eq!(rows.len(), 401);
    let before = fs::metadata(&cache).unwrap().modified().unwrap();
    run_ok(&args);
    assert_eq!(fs::metadata(&cache).unwrap().modified().unwrap(), before);
}
