//! End-to-end checks of the command-line binary: frozen output schemas,
//! deterministic reruns, exit codes, and the JSON summary mode. Each test
//! spawns the real executable.

use serde_json::Value;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maxwell-lfr"))
}

/// Fresh scratch directory under the system temp dir.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("maxwell-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_str(stdout_of(out).trim()).expect("stdout is JSON")
}

#[test]
fn coeffs_reports_rational_table() {
    let v = json_of(&run(&["coeffs", "--R", "8", "--format", "json"]));
    assert_eq!(v["R"], 8);
    assert_eq!(v["routes_agree"], true);
    let gamma: Vec<&str> = v["gamma"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g.as_str().unwrap())
        .collect();
    assert_eq!(gamma, ["1", "-1/12", "1/120", "-17/20160"]);
    let g1 = v["gamma_f64"][1].as_f64().unwrap();
    assert!((g1 + 1.0 / 12.0).abs() < 1e-15);

    let text = stdout_of(&run(&["coeffs", "--R", "6"]));
    assert!(text.contains("1/120"), "text table lists the rationals");
}

#[test]
fn bad_configs_exit_with_code_2() {
    for args in [
        vec!["coeffs", "--R", "5"],
        vec![
            "solve", "--example", "1", "--R", "7", "--order", "1", "--n", "2", "--dt", "0.125",
        ],
        // missing any time grid
        vec!["solve", "--example", "1", "--R", "2", "--order", "1", "--n", "2"],
        // dt does not divide T
        vec![
            "solve", "--example", "1", "--R", "2", "--order", "1", "--n", "2", "--dt", "0.3",
        ],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(2),
            "expected exit 2 for {args:?}, stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(
            String::from_utf8_lossy(&out.stderr).starts_with("error:"),
            "diagnostic goes to stderr"
        );
    }
}

#[test]
fn solve_outputs_are_frozen_and_deterministic() {
    let a = scratch("solve-a");
    let b = scratch("solve-b");
    for dir in [&a, &b] {
        let out = run(&[
            "solve",
            "--example",
            "1",
            "--R",
            "2",
            "--order",
            "1",
            "--n",
            "2",
            "--dt",
            "0.125",
            "--T",
            "0.25",
            "--dump-fields",
            "1",
            "--out",
            dir.to_str().unwrap(),
        ]);
        let line = stdout_of(&out);
        assert!(line.contains("err_E="), "summary line: {line}");
    }

    // Identical configs must produce byte-identical data files.
    for name in ["energy.csv", "errors.json"] {
        let fa = fs::read(a.join(name)).unwrap();
        let fb = fs::read(b.join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between reruns");
    }

    let energy = fs::read_to_string(a.join("energy.csv")).unwrap();
    let mut lines = energy.lines();
    assert_eq!(lines.next(), Some("step,time,energy,rel_drift"));
    assert_eq!(energy.lines().count(), 1 + 2 + 1, "header + one row per state");

    let errors: Value = serde_json::from_str(&fs::read_to_string(a.join("errors.json")).unwrap()).unwrap();
    for key in ["config", "err_p", "err_E", "err_H", "err_total", "times"] {
        assert!(errors.get(key).is_some(), "errors.json missing {key}");
    }
    assert!(errors["times"]["p_e"].as_f64().unwrap() > 0.0);

    // run-config.json: config echo identical, wall time allowed to differ.
    let rc_a: Value = serde_json::from_str(&fs::read_to_string(a.join("run-config.json")).unwrap()).unwrap();
    let rc_b: Value = serde_json::from_str(&fs::read_to_string(b.join("run-config.json")).unwrap()).unwrap();
    assert_eq!(rc_a["config"], rc_b["config"]);
    assert_eq!(rc_a["config"]["R"], 2);
    assert!(rc_a["meta"]["wall_seconds"].as_f64().is_some());

    // Field dumps for states 0, 1, 2 in legacy VTK.
    for step in ["000000", "000001", "000002"] {
        let vtk = fs::read_to_string(a.join(format!("fields-{step}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
        assert!(vtk.contains("DATASET UNSTRUCTURED_GRID"));
        assert!(vtk.contains("VECTORS E double"));
    }
}

#[test]
fn solve_json_summary_is_machine_readable() {
    let dir = scratch("solve-json");
    let v = json_of(&run(&[
        "solve",
        "--example",
        "1",
        "--R",
        "2",
        "--order",
        "1",
        "--n",
        "2",
        "--dt",
        "0.125",
        "--T",
        "0.25",
        "--format",
        "json",
        "--out",
        dir.to_str().unwrap(),
    ]));
    for key in ["err_E", "err_H", "err_p", "max_rel_drift", "out", "wall_seconds"] {
        assert!(v.get(key).is_some(), "summary missing {key}");
    }
}

#[test]
fn mesh_info_reports_structured_counts() {
    let v = json_of(&run(&["mesh-info", "--n", "2", "--format", "json"]));
    assert_eq!(v["n_vertices"], 9);
    assert_eq!(v["n_edges"], 16);
    assert_eq!(v["n_triangles"], 8);
    assert!((v["min_angle_deg"].as_f64().unwrap() - 45.0).abs() < 1e-9);
    assert!((v["h_max"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn convergence_writes_rows_and_slopes() {
    let dir = scratch("conv");
    let line = stdout_of(&run(&[
        "convergence",
        "--example",
        "1",
        "--mode",
        "temporal",
        "--R",
        "2",
        "--order",
        "1",
        "--n",
        "2",
        "--T",
        "0.5",
        "--dt-list",
        "0.25,0.125,0.0625",
        "--ref-ratio",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ]));
    assert!(line.contains("slope_E="), "summary: {line}");

    let csv = fs::read_to_string(dir.join("convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("mode,R,order,n,dt,err_p,err_E,err_H,err_total")
    );
    assert_eq!(csv.lines().count(), 1 + 3, "header + one row per step size");
    assert!(csv.contains("temporal,2,1,2,0.25,"));

    let slopes: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("slopes.json")).unwrap()).unwrap();
    assert_eq!(slopes["mode"], "temporal");
    assert_eq!(slopes["points"], 3);
    for field in ["p", "E", "H"] {
        assert!(slopes["field_slopes"][field].as_f64().is_some());
    }
    assert!(slopes["fit_residual"].as_f64().is_some());

    // Too few points is a configuration error.
    let short = bin()
        .args([
            "convergence",
            "--example",
            "1",
            "--mode",
            "temporal",
            "--R",
            "2",
            "--order",
            "1",
            "--n",
            "2",
            "--T",
            "0.5",
            "--dt-list",
            "0.25,0.125",
            "--out",
            dir.join("short").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(short.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = scratch("config-file");
    fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("run.json");
    fs::write(
        &cfg_path,
        r#"{"example": 1, "R": 2, "order": 1, "n": 2, "dt": 0.125, "T": 0.25}"#,
    )
    .unwrap();

    // R from the flag beats R from the file; everything else comes from it.
    let v = json_of(&run(&[
        "solve",
        "--config",
        cfg_path.to_str().unwrap(),
        "--R",
        "4",
        "--format",
        "json",
        "--out",
        dir.join("out").to_str().unwrap(),
    ]));
    assert!(v["err_E"].as_f64().is_some());
    let rc: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/run-config.json")).unwrap())
            .unwrap();
    assert_eq!(rc["config"]["R"], 4, "flag wins over config file");
    assert_eq!(rc["config"]["n"], 2, "file fills unset flags");
}
