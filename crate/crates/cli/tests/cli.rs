//! End-to-end tests of the compiled binary: exit codes, determinism, flag
//! overrides, and the no-partial-output guarantee on rejected configs.

use std::path::Path;
use std::process::Output;

const HARD_ROD: &str = "\
[potential]
kind = hard_core
d = 1
r = 0.5

[region]
kind = interval
a = 0
b = 1

[activity]
lambda = 1
";

fn repgas(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_repgas"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn cphi_reports_the_temperedness_constant_and_critical_activity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", HARD_ROD);
    let out = repgas(&["--config", &cfg, "cphi"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("c_phi = 1.00000000e0"), "stdout: {stdout}");
    assert!(
        stdout.contains("critical_activity = 2.71828183e0"),
        "stdout: {stdout}"
    );
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let out = repgas(&["--config", "/nonexistent/run.cfg", "cphi"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("config error"), "stderr: {stderr}");
}

#[test]
fn omitted_config_flag_is_a_usage_error() {
    let out = repgas(&["cphi"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "lambda = 1\n");
    let out = repgas(&["--config", &cfg, "cphi"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("outside any section"), "stderr: {stderr}");
}

#[test]
fn missing_potential_table_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tab.cfg",
        "[potential]\nkind = tabulated\ntable = nothere.tsv\n\n[region]\na = 0\nb = 1\n\n[activity]\nlambda = 1\n",
    );
    let out = repgas(&["--config", &cfg, "cphi"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("table file not found"), "stderr: {stderr}");
}

#[test]
fn node_budget_guard_rejects_the_run_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "big.cfg",
        &format!("{HARD_ROD}\n[engine]\ndepth = 9\nnode_budget = 50\n"),
    );
    let out_path = dir.path().join("density.csv");
    let out = repgas(&[
        "--config",
        &cfg,
        "--out",
        out_path.to_str().unwrap(),
        "density",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("node_budget"), "stderr: {stderr}");
    assert!(!out_path.exists(), "rejected run must not leave output");
}

#[test]
fn zeros_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", HARD_ROD);
    let mut renders = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let out = repgas(&["--config", &cfg, "--out", path.to_str().unwrap(), "zeros"]);
        assert!(out.status.success());
        renders.push(std::fs::read(&path).unwrap());
    }
    assert!(!renders[0].is_empty());
    assert_eq!(renders[0], renders[1]);
}

#[test]
fn format_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        &format!("{HARD_ROD}\n[output]\nformat = csv\n"),
    );
    let path = dir.path().join("zeros.jsonl");
    let out = repgas(&[
        "--config",
        &cfg,
        "--out",
        path.to_str().unwrap(),
        "--format",
        "jsonl",
        "zeros",
    ]);
    assert!(out.status.success());
    let body = std::fs::read_to_string(&path).unwrap();
    assert!(!body.is_empty());
    for line in body.lines() {
        assert!(line.starts_with('{') && line.ends_with('}'), "line: {line}");
    }
}

#[test]
fn unknown_format_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", HARD_ROD);
    let out = repgas(&["--config", &cfg, "--format", "xml", "zeros"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn density_profile_lands_near_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", HARD_ROD);
    let path = dir.path().join("density.csv");
    let out = repgas(&[
        "--config",
        &cfg,
        "--out",
        path.to_str().unwrap(),
        "density",
        "--depth",
        "4",
    ]);
    assert!(out.status.success());
    let body = std::fs::read_to_string(&path).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "depth,rho_re,rho_im,last_step_delta"
    );
    let last = lines.last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert_eq!(fields[0], "4");
    let rho: f64 = fields[1].parse().unwrap();
    assert!((rho - 8.0 / 17.0).abs() < 5e-3, "rho = {rho}");
}

#[test]
fn seed_flag_controls_sampler_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        &format!("{HARD_ROD}\n[engine]\nmc_steps = 20000\nmc_burn_in = 2000\nmc_chains = 1\n"),
    );
    let run = |name: &str, seed: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let out = repgas(&[
            "--config",
            &cfg,
            "--out",
            path.to_str().unwrap(),
            "--seed",
            seed,
            "mc",
        ]);
        assert!(out.status.success());
        std::fs::read(&path).unwrap()
    };
    let first = run("s7a.csv", "7");
    let second = run("s7b.csv", "7");
    let other = run("s8.csv", "8");
    assert_eq!(first, second);
    assert_ne!(first, other);
}
