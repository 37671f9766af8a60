use std::fs;
use std::path::Path;
use std::process::Command;

use contactflow_cli::output::{polylines_csv, read_curve};
use contactflow_cli::run_with;
use contactflow_core::legendre::{project_branches, project_curve, prune, sample_curve, split_branches};
use contactflow_core::numeric::linspace;
use contactflow_core::{ModelParams, Plane, PruneMode};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("contactflow").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn branches_examples() {
    let (code, out, _) = run(&["branches", "--j0bar", "1.0", "--x", "0.1"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "mu,x,y,z,stability,degenerate");
    assert_eq!(lines.len(), 4);
    let roles: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(roles, ["MostStable", "Metastable", "Unstable"]);

    let (code, out, _) = run(&["branches", "--j0bar", "0.4", "--x", "0.1", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn raw_parameters_match_reduced_ones() {
    let (_, reduced, _) = run(&["branches", "--j0bar", "1.0", "--x", "0.1"]);
    let (code, raw, _) = run(&["branches", "--beta", "0.5", "--j0", "2.0", "--field", "0.2"]);
    assert_eq!(code, 0);
    assert_eq!(raw, reduced);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["branches", "--j0bar", "1.0", "--beta", "1", "--j0", "1", "--x", "0.1"][..],
        &["branches", "--j0bar", "1.0"],
        &["frobnicate"],
        &["project", "--in", "/nonexistent/curve.csv", "--plane", "xz", "--out", "/tmp/never.csv"],
        &["basin", "--variant", "squared", "--j0bar", "1", "--x-grid", "0:1", "--offsets", "-0.1", "--out", "/tmp/never.csv"],
        &["flow", "--variant", "squared", "--j0bar", "1", "--x", "0.3", "--z0", "-1", "--dt", "0", "--out", "/tmp/never.csv"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn numeric_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = path(dir.path(), "s.csv");
    let (code, _, err) = run(&["sweep", "--j0bar", "0.4", "--x-max", "0.5", "--steps", "11", "--out", &sweep]);
    assert_eq!(code, 2);
    assert!(err.contains("phase error"), "{err}");
    assert!(!dir.path().join("s.csv").exists());

    let flow = path(dir.path(), "f.csv");
    let (code, _, _) = run(&["flow", "--variant", "squared", "--j0bar", "1", "--x", "0.9", "--z0", "-1", "--out", &flow]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["branches", "--j0bar", "0", "--x", "0.1"]);
    assert_eq!(code, 2);
}

#[test]
fn help_and_version_succeed() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("branches") && out.contains("check"));
    let (code, out, _) = run(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("contactflow "));
}

#[test]
fn curve_round_trips_through_project() {
    let dir = tempfile::tempdir().unwrap();
    let curve = path(dir.path(), "curve.csv");
    assert_eq!(run(&["curve", "--j0bar", "1.0", "--out", &curve]).0, 0);

    let par = ModelParams::new(1.0).unwrap();
    let reference = sample_curve(&par, &linspace(-0.999, 0.999, 2001)).unwrap();
    assert_eq!(read_curve(Path::new(&curve)).unwrap(), reference);

    let whole = path(dir.path(), "whole.csv");
    assert_eq!(run(&["project", "--in", &curve, "--plane", "xz", "--out", &whole]).0, 0);
    assert_eq!(fs::read_to_string(&whole).unwrap(), polylines_csv(&project_curve(&reference, Plane::XZ), ("x", "z")));

    let branches = split_branches(&reference).unwrap();
    for (flag, mode) in [("unstable", PruneMode::DropUnstable), ("unstable-metastable", PruneMode::DropUnstableAndMetastable)] {
        let out = path(dir.path(), "pruned.csv");
        let svg = path(dir.path(), "pruned.svg");
        let (code, _, _) = run(&["project", "--in", &curve, "--plane", "xy", "--prune", flag, "--out", &out, "--svg", &svg]);
        assert_eq!(code, 0);
        let lines = project_branches(&prune(&branches, mode), Plane::XY);
        assert_eq!(fs::read_to_string(&out).unwrap(), polylines_csv(&lines, ("x", "y")));
        assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polyline").count(), lines.len());
    }
}

#[test]
fn minus_convention_curve_is_readable() {
    let dir = tempfile::tempdir().unwrap();
    let curve = path(dir.path(), "c.csv");
    let (code, _, _) = run(&["curve", "--j0bar", "2.0", "--n", "11", "--convention", "minus", "--out", &curve]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&curve).unwrap();
    assert_eq!(text.lines().next(), Some("x,y,z,j0bar,convention"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",2.0000000000000000e0,minus")));
    let c = read_curve(Path::new(&curve)).unwrap();
    assert_eq!(c.samples.len(), 11);
}

#[test]
fn flow_writes_lyapunov_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "flow.csv");
    let args = [
        "flow", "--variant", "squared", "--j0bar", "1.0", "--x", "0.3", "--z0", "-1.3", "--t-max", "5", "--dt", "1e-2",
        "--stride", "10", "--out", &out,
    ];
    assert_eq!(run(&args).0, 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y,z,region,V,dVdt"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 51);
    let mut prev = f64::INFINITY;
    for r in &rows {
        assert_eq!(r[1], "2.9999999999999999e-1");
        assert_eq!(r[4], "D1+");
        let v: f64 = r[5].parse().unwrap();
        assert!(v <= prev && r[6].parse::<f64>().unwrap() <= 0.0);
        prev = v;
    }
}

#[test]
fn basin_sweep_and_toy_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let basin = path(dir.path(), "basin.csv");
    let svg = path(dir.path(), "basin.svg");
    let args = [
        "basin", "--variant", "squared", "--j0bar", "1", "--x-grid", "-0.4:0.4:5", "--offsets", "-0.2,-0.05",
        "--psi0-const", "50", "--out", &basin, "--svg", &svg,
    ];
    assert_eq!(run(&args).0, 0);
    let text = fs::read_to_string(&basin).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows.iter().filter(|r| r.contains(",excluded,")).count(), 2);
    assert!(rows.iter().filter(|r| r.contains(",limit,")).all(|r| r.split(',').nth(10) == Some("1")));
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polyline").count(), 1);

    let sweep = path(dir.path(), "sweep.csv");
    assert_eq!(run(&["sweep", "--j0bar", "1", "--x-max", "0.6", "--steps", "25", "--out", &sweep]).0, 0);
    let text = fs::read_to_string(&sweep).unwrap();
    assert_eq!(text.lines().next(), Some("direction,x,y,z"));
    assert_eq!(text.lines().filter(|l| l.starts_with("up,")).count(), 25);
    assert_eq!(text.lines().filter(|l| l.starts_with("down,")).count(), 25);

    let toy = path(dir.path(), "toy.csv");
    assert_eq!(run(&["toy", "--x-grid", "-0.125,0,1", "--out", &toy]).0, 0);
    let text = fs::read_to_string(&toy).unwrap();
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(1), Some("6.2500000000000000e-2"));
    assert_eq!(run(&["toy", "--x-grid", "-1", "--out", &toy]).0, 2);
}

#[test]
fn audit_and_quick_check() {
    let (code, out, _) = run(&["audit", "--beta", "1.0", "--j0", "1", "--field", "0.1", "--n-list", "64,256,1024"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
    assert_eq!(run(&["audit", "--beta", "1.0", "--j0", "1", "--field", "0.1", "--n-list", "256,64"]).0, 2);
    assert_eq!(run(&["audit", "--beta", "1.0", "--j0", "1", "--field", "0.1", "--n-list", "a"]).0, 1);

    let (code, out, _) = run(&["check"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn binary_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_contactflow");
    let run_bin = |out: &str| {
        let status = Command::new(exe)
            .args(["flow", "--variant", "cubic", "--j0bar", "1", "--x", "0.2", "--z0", "-0.9", "--t-max", "10", "--out", out])
            .env("CONTACTFLOW_LOG", "debug")
            .output()
            .unwrap();
        assert!(status.status.success());
        assert!(String::from_utf8_lossy(&status.stderr).contains("termination"));
        fs::read(out).unwrap()
    };
    let a = run_bin(&path(dir.path(), "a.csv"));
    let b = run_bin(&path(dir.path(), "b.csv"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}
