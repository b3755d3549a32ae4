use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qcflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcflow")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn mean_field(dir: &Path, extra: &str) -> String {
    format!(
        r#"{{
        "algebra": {{"qubits": 1}},
        "observables": {{"x": "X", "y": "Y", "z": "Z"}},
        "hamiltonian": {{"terms": [{{"coef": 0.5, "monomial": {{"z": 2}}}}]}},
        "initial_states": ["bloch(0.8, 0, 0.6)"],
        "grid": {{"start": 0.0, "stop": 2.0, "step": 0.05}},
        "outputs": {{"dir": "{}", "probes": ["x", "z"]}},
        "seed": 3{extra}
    }}"#,
        dir.join("out").display()
    )
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn simulate_matches_rotation_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &mean_field(dir.path(), ""));
    let out = qcflow(&["simulate", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/trajectory_0.csv"));
    assert_eq!(header, ["t", "x", "z", "purity", "energy", "picard_iters"]);
    assert_eq!(rows.len(), 41);
    for r in &rows {
        assert!((r[1] - 0.8 * (1.2 * r[0]).cos()).abs() <= 1e-5);
        assert!((r[2] - 0.6).abs() <= 1e-7);
        assert!((r[3] - 1.0).abs() <= 1e-7);
    }
    let diag: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/diagnostics.json")).unwrap()).unwrap();
    assert!(!diag["trajectories"][0]["windows"].as_array().unwrap().is_empty());
}

#[test]
fn zero_hamiltonian_gives_constant_columns() {
    let dir = tempfile::tempdir().unwrap();
    let text = mean_field(dir.path(), "").replace(r#"{"coef": 0.5, "monomial": {"z": 2}}"#, "");
    let cfg = write(dir.path(), "c.json", &text);
    assert!(qcflow(&["simulate", &cfg]).status.success());
    let (_, rows) = read_csv(&dir.path().join("out/trajectory_0.csv"));
    for r in &rows {
        assert_eq!(r[1..], rows[0][1..]);
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text = mean_field(dir.path(), "").replace(r#""bloch(0.8, 0, 0.6)""#, r#""random", "random_pure""#);
    let cfg = write(dir.path(), "c.json", &text);
    assert!(qcflow(&["simulate", &cfg]).status.success());
    let first = std::fs::read(dir.path().join("out/trajectory_1.csv")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qcflow")).args(["simulate", &cfg]).env("QCFLOW_WORKERS", "1").output().unwrap();
    assert!(out.status.success());
    assert_eq!(first, std::fs::read(dir.path().join("out/trajectory_1.csv")).unwrap());
}

#[test]
fn validation_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = mean_field(dir.path(), r#", "solver": {"lipschitz_d0": 4.0, "window": 0.2}"#);
    let out = qcflow(&["simulate", &write(dir.path(), "c.json", &text)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.window"));

    let text = mean_field(dir.path(), "").replace(r#""seed": 3"#, r#""seed": 3, "colour": 1"#);
    assert_eq!(qcflow(&["simulate", &write(dir.path(), "d.json", &text)]).status.code(), Some(1));

    let cfg = write(dir.path(), "e.json", &mean_field(dir.path(), ""));
    let out = Command::new(env!("CARGO_BIN_EXE_qcflow")).args(["simulate", &cfg]).env("QCFLOW_WORKERS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solver_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = mean_field(dir.path(), r#", "solver": {"picard_max_iter": 1, "picard_tol": 1e-14}"#)
        .replace(r#""monomial": {"z": 2}"#, r#""monomial": {"x": 2}}, {"coef": 1.0, "monomial": {"z": 1}"#);
    let out = qcflow(&["simulate", &write(dir.path(), "c.json", &text)]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn default_check_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &mean_field(dir.path(), ""));
    let out = qcflow(&["check", &cfg]);
    let report = stdout_json(&out);
    assert_eq!(out.status.code(), Some(0), "{report}");
    assert_eq!(report["passed"], true);
    let suites: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["suite"].as_str().unwrap()).collect();
    for s in ["jacobi", "cocycle", "purity", "energy", "liouville", "oracle"] {
        assert!(suites.contains(&s), "{s}");
    }
}

#[test]
fn loosened_step_fails_oracle_check() {
    let dir = tempfile::tempdir().unwrap();
    let text = mean_field(dir.path(), r#", "solver": {"ode_step": 0.5}"#).replace(r#""step": 0.05"#, r#""step": 0.5"#);
    let out = qcflow(&["check", &write(dir.path(), "c.json", &text), "--suite", "oracle"]);
    assert_eq!(out.status.code(), Some(3));
    let report = stdout_json(&out);
    let item = &report["checks"][0];
    assert_eq!(item["passed"], false);
    assert!(item["defect"].as_f64().unwrap() > item["threshold"].as_f64().unwrap());
}

#[test]
fn empty_suite_selection_is_an_empty_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &mean_field(dir.path(), r#", "checks": {"suites": []}"#));
    let out = qcflow(&["check", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out), serde_json::json!({"passed": true, "checks": []}));
}

#[test]
fn bracket_of_x_and_y() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", r#"{"observables": {"x": "X"}, "terms": [{"coef": 1.0, "monomial": {"x": 1}}]}"#);
    let g = write(dir.path(), "g.json", r#"{"observables": {"y": "Y"}, "terms": [{"coef": 1.0, "monomial": {"y": 1}}]}"#);
    let out = qcflow(&["bracket", &f, &g, "--state", "bloch(0, 0, 1)"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    // i[X, Y] = -2Z
    assert!((v["value"].as_f64().unwrap() + 2.0).abs() < 1e-14);
}

#[test]
fn hypertop_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let sq = write(dir.path(), "sq.json", r#"{"dim": 2, "vertices": [[0,0],[1,0],[1,1],[0,1],[0.5,0.5]]}"#);
    let out = qcflow(&["hypertop", "distance", &sq, &sq]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["hausdorff_d"], 0.0);
    assert!(v["dh_a"].as_array().unwrap().iter().all(|d| d == 0.0));

    let out = qcflow(&["hypertop", "reduce", &sq]);
    assert_eq!(stdout_json(&out)["vertices"].as_array().unwrap().len(), 4);

    let k0 = write(dir.path(), "k0.json", r#"{"dim": 6, "vertices": [[0.5,0,0,0,0,0],[0,0.5,0,0,0,0]]}"#);
    let trace = dir.path().join("trace.json").display().to_string();
    let out = qcflow(&["hypertop", "poulsen", &k0, "--epsilon", "1", "--steps", "3", "--bound", "1", "--seed", "5", "--out", &trace]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(log["steps"][0]["lambda"], 0.25);
    assert_eq!(log["steps"].as_array().unwrap().len(), 3);

    let small = write(dir.path(), "small.json", r#"{"dim": 2, "vertices": [[0.25,0.25],[0.75,0.25],[0.75,0.75]]}"#);
    let out = qcflow(&["hypertop", "limits", &small, &sq, &sq]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let out = qcflow(&["hypertop", "limits", &sq, &small, &sq]);
    assert_eq!(out.status.code(), Some(3));
}
