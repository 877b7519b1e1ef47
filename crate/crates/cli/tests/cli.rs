use std::path::Path;
use std::process::Command;

use qeffect_cli::Report;

fn qeffect(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qeffect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_report(dir: &Path) -> Report {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn list_names_every_scenario() {
    let out = qeffect(&["--list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 10);
    for name in [
        "check-order",
        "weak-atom",
        "complementarity",
        "dilation-check",
        "jm-feasible",
        "qubit-region",
        "noise-threshold",
        "haversine-trend",
        "number-phase-trend",
        "multislit",
        "convolution-jauch",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn multislit_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "scenario = multislit\nseed = 5\ns = 3\nm = 4\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = qeffect(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let r = read_report(&out_dir);
    assert_eq!(r.scenario, "multislit");
    assert_eq!(r.seed, 5);
    assert_eq!(r.values["all_disjoint"], serde_json::json!(true));
    assert_eq!(r.values["disjoint"], serde_json::json!(9));
    let csv = std::fs::read_to_string(out_dir.join("series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn weak_atom_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = qeffect(&[
        "--scenario",
        "weak-atom",
        "-p",
        "e=1,0.25",
        "-p",
        "phi=1,1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = read_report(dir.path());
    let v = r.values["bound"].as_f64().unwrap();
    assert!((v - 0.4).abs() < 1e-12, "{v}");
    assert!(!dir.path().join("series.csv").exists());
}

#[test]
fn qubit_region_boundary_near_inverse_sqrt_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qeffect(&[
        "--scenario",
        "qubit-region",
        "-p",
        "grid=101",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let r = read_report(dir.path());
    let b = r.values["diagonal_boundary"].as_f64().unwrap();
    assert!((b - std::f64::consts::FRAC_1_SQRT_2).abs() <= 0.01, "{b}");
    let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("lambda,mu,feasible"));
    assert_eq!(csv.lines().count(), 1 + 101 * 101);
    // (0.7, 0.7) feasible, (0.72, 0.72) not.
    assert!(csv.lines().any(|l| l == "0.7,0.7,1"));
    assert!(csv.lines().any(|l| l == "0.72,0.72,0"));
}

#[test]
fn same_seed_same_report() {
    let runs: Vec<String> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = qeffect(&[
                "--scenario",
                "complementarity",
                "--seed",
                "42",
                "-p",
                "model=random",
                "-p",
                "dim=3",
                "--out",
                dir.path().to_str().unwrap(),
            ]);
            assert_eq!(out.status.code(), Some(0));
            read_report(dir.path()).canonical_json().unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let dir = tempfile::tempdir().unwrap();
    qeffect(&[
        "--scenario",
        "complementarity",
        "--seed",
        "43",
        "-p",
        "model=random",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ne!(read_report(dir.path()).canonical_json().unwrap(), runs[0]);
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["--scenario", "no-such-scenario", "--out", d],
        vec!["--scenario", "multislit", "-p", "slits=3", "--out", d],
        vec![
            "--scenario",
            "multislit",
            "--tol-override",
            "bogus=1",
            "--out",
            d,
        ],
        vec!["--scenario", "multislit", "--seed", "minus-one", "--out", d],
        vec!["--scenario", "multislit", "-p", "s=1", "--out", d],
        vec!["--bogus-flag"],
        vec!["--out", d],
    ] {
        let out = qeffect(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {out:?}");
    }
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn inconclusive_oracle_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // Just past the threshold; two cycles cannot reach a certificate.
    let out = qeffect(&[
        "--scenario",
        "jm-feasible",
        "-p",
        "lambda=0.7072",
        "-p",
        "mu=0.7072",
        "--tol-override",
        "dykstra_max_iter=2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let r = read_report(dir.path());
    assert_eq!(r.values["status"], serde_json::json!("inconclusive"));
    assert_eq!(r.tolerances.dykstra_max_iter, 2);
}

#[test]
fn tolerance_overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let out = qeffect(&[
        "--scenario",
        "multislit",
        "--tol-override",
        "rank_rel=1e-8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = read_report(dir.path());
    assert_eq!(r.tolerances.rank_rel, 1e-8);
    assert_eq!(r.inputs["s"], "3");
}
