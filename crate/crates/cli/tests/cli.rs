use std::process::{Command, Output};

use serde_json::Value;

fn syzygy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syzygy")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = syzygy(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn lagrange_points_at_equal_masses() {
    let v = json(&["lagrange", "--mu", "0.5", "--format", "json"]);
    assert_eq!(v["schema"], "syzygy/1");
    let points = v["result"].as_array().unwrap();
    assert_eq!(points.len(), 5);
    assert_eq!(points[0]["label"], "L1");
    assert_eq!(points[0]["location"]["q1"].as_f64().unwrap(), 0.0);
    assert_eq!(points[0]["value"].as_f64().unwrap(), -2.0);
}

#[test]
fn default_lemma_path_passes() {
    let out = syzygy(&["verify-lemma", "--path", "default", "--samples", "200"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("count=2 at all samples"));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["samples"].as_array().unwrap().len(), 200);
    assert_eq!(v["config"]["gamma"].as_array().unwrap().len(), 200);
}

#[test]
fn hill_critical_points() {
    let v = json(&["hill", "critical"]);
    let x = v["result"]["points"][0]["location"]["q1"].as_f64().unwrap();
    assert!((x - 3f64.powf(-1.0 / 3.0)).abs() < 1e-12);
    assert!((v["result"]["value"].as_f64().unwrap() + 2.1633743554611122).abs() < 1e-12);
}

#[test]
fn csv_has_header_and_full_precision() {
    let out = syzygy(&["oval", "--mu", "0.3", "--normalized-energy", "0.5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q1,q2"));
    let first = lines.next().unwrap();
    let mantissa = first.split(',').next().unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["oval", "--mu", "0.2", "--energy", "-1.8", "--format", "csv"],
        &["syzygies", "--mu", "0.5", "--energy", "-1.9", "--q1", "0.7"],
        &["orbit", "--mu", "0.5", "--energy", "-1.9", "--q1", "0.7", "--format", "csv"],
        &["verify-lemma", "--samples", "30", "--path", "from-base", "--mu", "0.45", "--normalized-energy", "0.3"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("{k}-{i}.out"))).collect();
        for p in &paths {
            let mut full = args.to_vec();
            full.extend(["--out", p.to_str().unwrap()]);
            let out = syzygy(&full);
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            assert!(out.stdout.is_empty());
        }
        let (a, b) = (std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["frobnicate"][..],
        &["lagrange"],
        &["lagrange", "--mu", "1.5"],
        &["classify", "--mu", "0.5", "--energy", "-2.0"],
        &["classify", "--mu", "0.5", "--energy", "-1.9", "--normalized-energy", "0.5"],
        &["classify", "--system", "hill", "--normalized-energy", "0.5"],
        &["oval", "--mu", "0.3", "--normalized-energy", "1.5"],
        &["verify-lemma", "--samples", "3"],
        &["orbit", "--mu", "0.5", "--energy", "-1.9", "--q1", "1.3"],
        &["lagrange", "--mu", "0.3", "--format", "xml"],
    ] {
        let out = syzygy(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn every_figure_has_data() {
    for args in [
        &["energies", "--mu", "0.3", "--profile", "--format", "csv"][..],
        &["hill", "oval", "--energy", "-2.2", "--format", "csv"],
        &["vq1-zeros", "--mu", "0.2", "--format", "csv"],
        &["wzero", "--mu", "0.3", "--format", "csv"],
        &["certify-base", "--format", "csv"],
        &["hill", "check", "--energy", "-2.2"],
        &["tangents", "--mu", "0.3", "--normalized-energy", "0.4"],
        &["classify", "--system", "kepler", "--energy", "-1.7"],
    ] {
        let out = syzygy(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.len() > 10, "{args:?}");
    }
}

#[test]
fn lyapunov_orbit_has_no_quadratures() {
    let v = json(&["hill", "orbit", "--energy", "-2.1623743554611122", "--q1", "0.7009"]);
    assert_eq!(v["result"]["report"]["quadratures"].as_array().unwrap().len(), 0);
    assert_eq!(v["result"]["report"]["count"], 2);
}
