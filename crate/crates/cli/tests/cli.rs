use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsl"))
        .args(args)
        .output()
        .expect("qsl binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_json(cfg: &Path) -> (Value, Output) {
    let out = qsl(&["run", arg(cfg)]);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (doc, out)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn saturating_run_reports_unit_slack() {
    let (doc, out) = run_json(&config("saturation.json"));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let q = &doc["qsl"];
    assert!((num(&q["slacks"]["mt"]) - 1.0).abs() <= 1e-4);
    assert!((num(&q["slacks"]["ml_lin"]) - 1.0).abs() <= 1e-4);
    assert!((num(&q["bures"]) - std::f64::consts::FRAC_PI_2).abs() <= 1e-6);
    assert_eq!(doc["meta"]["grid"], 2048);
    assert!(doc["meta"]["wall_ms"].is_null());
    assert_eq!(doc["audit"]["tolerance"], 1e-6);
    assert_eq!(doc["audit"]["checks"].as_array().unwrap().len(), 7);
}

#[test]
fn report_keys_are_stable() {
    let (doc, _) = run_json(&config("saturation.json"));
    for key in ["version", "grid", "wall_ms"] {
        assert!(doc["meta"].get(key).is_some(), "meta.{key}");
    }
    for key in [
        "tau",
        "bures",
        "e_avg",
        "de_avg",
        "tau_mt",
        "tau_ml_quad",
        "tau_ml_lin",
        "tau_qsl",
        "slacks",
    ] {
        assert!(doc["qsl"].get(key).is_some(), "qsl.{key}");
    }
    for check in doc["audit"]["checks"].as_array().unwrap() {
        for key in ["name", "worst_margin", "worst_time", "passed"] {
            assert!(check.get(key).is_some(), "check.{key}");
        }
    }
}

#[test]
fn timing_flag_records_wall_time() {
    let out = qsl(&["run", arg(&config("saturation.json")), "--timing"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(num(&doc["meta"]["wall_ms"]) > 0.0);
}

#[test]
fn stationary_run_has_zero_bounds() {
    let (doc, out) = run_json(&config("stationary.json"));
    assert_eq!(out.status.code(), Some(0));
    let q = &doc["qsl"];
    assert_eq!(num(&q["bures"]), 0.0);
    for key in ["tau_mt", "tau_ml_quad", "tau_ml_lin", "tau_qsl"] {
        assert_eq!(num(&q[key]), 0.0, "{key}");
    }
    assert_eq!(q["slacks"]["min"], "inf");
}

#[test]
fn missing_duration_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "bad.json",
        r#"{"kind": "constant", "dim": 2, "matrix": [[0, 0], [0, 1]], "initial_state": "ground"}"#,
    );
    let out = qsl(&["run", arg(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duration"));
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_inputs_map_to_exit_code_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(qsl(&["run", arg(&missing)]).status.code(), Some(2));
    let non_hermitian = write_config(
        &dir,
        "nh.json",
        r#"{"kind": "matrix_samples", "dim": 2, "duration": 1,
            "samples": [{"t": 0, "matrix": [[0, 1], [0, 0]]}, {"t": 1, "matrix": [[0, 0], [0, 1]]}],
            "initial_state": "equal_superposition"}"#,
    );
    let out = qsl(&["run", arg(&non_hermitian)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples[0].matrix"));
    let unnormalized = write_config(
        &dir,
        "un.json",
        r#"{"kind": "constant", "dim": 2, "duration": 1, "matrix": [[0, 0], [0, 1]],
            "initial_state": {"pure": [1, 1]}}"#,
    );
    assert_eq!(qsl(&["run", arg(&unnormalized)]).status.code(), Some(2));
}

#[test]
fn oscillator_leakage_is_a_numerical_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "leak.json",
        r#"{"kind": "modulated_oscillator", "dim": 4, "duration": 1,
            "params": {"omega0": 1, "gamma": 0},
            "initial_state": {"pure": [0, 0, 1, 0]}}"#,
    );
    let out = qsl(&["run", arg(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oscillator levels"));
}

#[test]
fn audit_violation_exits_with_four() {
    // Driven pure run on which the overlap-cosine and phase checks fail.
    let out = qsl(&["audit", arg(&config("landau_zener.json"))]);
    assert_eq!(out.status.code(), Some(4));
    let section: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(section["passed"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlap_cosine"));
}

#[test]
fn audit_verb_writes_checks_only() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("audit.json");
    let out = qsl(&[
        "audit",
        arg(&config("mixed_qutrit.json")),
        "--tol",
        "1e-6",
        "-o",
        arg(&path),
    ]);
    assert!(out.status.success());
    let section: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let names: Vec<_> = section["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["velocity_variance", "mt_integrated", "ml_integrated"]
    );
    assert_eq!(section["skipped"].as_array().unwrap().len(), 4);
}

#[test]
fn sweep_keeps_input_order() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("gamma.csv");
    let out = qsl(&[
        "sweep",
        arg(&config("oscillator.json")),
        "--param",
        "params.gamma",
        "--values",
        "2,0,1,0.5",
        "-o",
        arg(&path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&path);
    assert_eq!(
        header,
        [
            "param_value",
            "tau",
            "bures",
            "e_avg",
            "de_avg",
            "tau_mt",
            "tau_ml_quad",
            "tau_ml_lin",
            "tau_qsl",
            "slack_min",
            "audit_passed"
        ]
    );
    let values: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(values, [2.0, 0.0, 1.0, 0.5]);
    assert!(rows.iter().all(|r| r[10] == "true" || r[10] == "false"));
}

#[test]
fn oscillator_sweep_lowers_the_linear_bound() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("gamma.csv");
    let out = qsl(&[
        "sweep",
        arg(&config("oscillator.json")),
        "--param",
        "params.gamma",
        "--values",
        "0,0.5,1,2",
        "-o",
        arg(&path),
    ]);
    assert!(out.status.success());
    let (_, rows) = read_csv(&path);
    let col = |i: usize| {
        rows.iter()
            .map(|r| r[i].parse::<f64>().unwrap())
            .collect::<Vec<_>>()
    };
    let (e_avg, ml_lin) = (col(3), col(7));
    assert!(e_avg.windows(2).all(|w| w[1] > w[0]), "{e_avg:?}");
    assert!(ml_lin.windows(2).all(|w| w[1] <= w[0]), "{ml_lin:?}");
}

#[test]
fn hbar_sweep_scales_bounds_linearly() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("hbar.csv");
    let out = qsl(&[
        "sweep",
        arg(&config("rabi.json")),
        "--param",
        "hbar",
        "--values",
        "0.5,1,2",
        "-o",
        arg(&path),
    ]);
    assert!(out.status.success());
    let (_, rows) = read_csv(&path);
    let at = |row: usize, i: usize| rows[row][i].parse::<f64>().unwrap();
    for i in [1, 5, 6, 7, 8] {
        let per_hbar = at(1, i);
        for (row, hbar) in [(0, 0.5), (2, 2.0)] {
            assert!(
                (at(row, i) / hbar - per_hbar).abs() <= 1e-9 * per_hbar,
                "column {i}"
            );
        }
    }
}

#[test]
fn sweep_rejects_unresolved_paths() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("x.csv");
    let out = qsl(&[
        "sweep",
        arg(&config("rabi.json")),
        "--param",
        "params.nope",
        "--values",
        "1",
        "-o",
        arg(&path),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!path.exists());
}

#[test]
fn failed_sweep_values_leave_no_row() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("d.csv");
    let out = qsl(&[
        "sweep",
        arg(&config("saturation.json")),
        "--param",
        "duration",
        "--values",
        "1,-1,2",
        "-o",
        arg(&path),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let (_, rows) = read_csv(&path);
    let values: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(values, [1.0, 2.0]);
}

#[test]
fn fisher_demo_writes_inverse_width() {
    let dir = TempDir::new().unwrap();
    for sigma in [1.0, 2.0] {
        let path = dir.path().join(format!("fisher-{sigma}.csv"));
        let out = qsl(&["fisher", "--sigma", &sigma.to_string(), "-o", arg(&path)]);
        assert!(out.status.success());
        let (header, rows) = read_csv(&path);
        assert_eq!(
            header,
            ["t", "fisher_information", "inverse_variance", "velocity_sq"]
        );
        assert_eq!(rows.len(), 101);
        for r in &rows {
            let v: Vec<f64> = r.iter().map(|x| x.parse().unwrap()).collect();
            let expected = 1.0 / (sigma * sigma);
            assert!((v[1] - expected).abs() <= 1e-3 * expected);
            assert_eq!(v[2], expected);
            assert!((v[3] - v[1]).abs() <= 1e-2 * v[1]);
        }
    }
    let bad = qsl(&[
        "fisher",
        "--sigma",
        "0",
        "-o",
        arg(&dir.path().join("x.csv")),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        assert!(
            qsl(&["run", arg(&config("mixed_qutrit.json")), "-o", arg(p)])
                .status
                .success()
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (c, d) = (dir.path().join("c.csv"), dir.path().join("d.csv"));
    for p in [&c, &d] {
        qsl(&[
            "sweep",
            arg(&config("oscillator.json")),
            "--param",
            "params.gamma",
            "--values",
            "0,1",
            "-o",
            arg(p),
        ]);
    }
    assert_eq!(std::fs::read(&c).unwrap(), std::fs::read(&d).unwrap());
}

#[test]
fn samples_file_is_resolved_next_to_the_config() {
    let dir = TempDir::new().unwrap();
    write_config(
        &dir,
        "samples.json",
        r#"[{"t": 0, "matrix": [[0, 0], [0, 1]]},
            {"t": 1, "matrix": [[0, {"re": 0.2, "im": 0.1}], [{"re": 0.2, "im": -0.1}, 1]]}]"#,
    );
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"kind": "matrix_samples", "dim": 2, "duration": 1, "samples_file": "samples.json",
            "initial_state": "equal_superposition"}"#,
    );
    let (doc, out) = run_json(&cfg);
    assert_ne!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(num(&doc["qsl"]["bures"]) > 0.0);
}
