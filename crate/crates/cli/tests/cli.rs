use std::path::Path;
use std::process::{Command, Output};

use subradiance::io::{parse_couplings, parse_density_matrix};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subradiance"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

#[test]
fn default_evolve_keeps_r1_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"time": {"stop": 5.0, "points": 21}}"#);
    let o = run(&["evolve", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("# subradiance "));
    assert!(csv.contains("# config_sha256 "));
    assert_eq!(header(&csv), "t,population,population_th,N_n,N_n_th");
    let expected = 2.0 * 5f64.sqrt() / 6.0;
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 21);
    for r in rows {
        assert!(r[1] <= 1.0 && (r[1] - 1.0).abs() < 1e-12);
        assert!((r[3] - expected).abs() < 1e-10);
        assert!((r[4] - expected).abs() < 1e-12);
    }
}

#[test]
fn engine_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"n": 2, "initial": {"kind": "excitation", "index": 1},
            "couplings": {"kind": "all_to_all", "alpha": 0.5},
            "time": {"stop": 2.0, "points": 11}, "theory": false}"#,
    );
    let expm = stdout(&run(&["evolve", "--config", &cfg]));
    let ode = run(&["evolve", "--config", &cfg, "--engine", "ode"]);
    assert!(ode.status.success(), "{}", stderr(&ode));
    let ode = stdout(&ode);
    assert!(ode.contains("# engine ode"));
    for (a, b) in data_rows(&expm).iter().zip(data_rows(&ode)) {
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

#[test]
fn random_study_is_reproducible_and_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"n": 4, "count": 25, "initial": {"kind": "w"}}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["random-study", "--config", &cfg, "--seed", "7", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let csv = String::from_utf8(a).unwrap();
    assert_eq!(header(&csv), "Nn_initial,Nn_final,fidelity_initial_final");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r[2])));

    let other = stdout(&run(&["random-study", "--config", &cfg, "--seed", "8"]));
    assert_ne!(other, csv);

    let missing = run(&["random-study", "--config", &cfg]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn predict_writes_matrix_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rho.json");
    let o = run(&["predict", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "steady=true max_entangled=true fidelity_initial_final=1");
    let rho = parse_density_matrix(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(rho.register().n(), 6);

    let cfg = write_config(dir.path(), "w.json", r#"{"n": 3, "initial": {"kind": "w"}}"#);
    let o = run(&["predict", "--config", &cfg]);
    let text = stdout(&o);
    let summary = text.lines().last().unwrap();
    let fid: f64 = summary
        .strip_prefix("steady=false max_entangled=false fidelity_initial_final=")
        .unwrap()
        .parse()
        .unwrap();
    assert!(fid < 1e-12, "{summary}");
}

#[test]
fn coherent_coupling_warns_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"n": 2, "initial": {"kind": "max_entangled", "k": 1},
            "couplings": {"kind": "all_to_all", "alpha": 1.0, "g": 0.6}}"#,
    );
    let o = run(&["predict", "--config", &cfg]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning: coherent coupling g is ignored"));
}

#[test]
fn spectrum_lists_every_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), "c.json", r#"{"n": 2, "initial": {"kind": "excitation", "index": 1}}"#);
    let csv = stdout(&run(&["spectrum", "--config", &cfg]));
    assert_eq!(header(&csv), "re,im");
    assert_eq!(data_rows(&csv).len(), 16);
}

#[test]
fn scan_and_entanglement_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"n": 3, "alphas": [0.9, 1.0], "initial": {"kind": "excitation", "index": 1},
            "time": {"stop": 4.0, "points": 5}}"#,
    );
    let scan = stdout(&run(&["scan", "--config", &cfg]));
    assert_eq!(header(&scan), "alpha,t,fidelity,delta_Nn");
    assert_eq!(data_rows(&scan).len(), 10);
    let ent = stdout(&run(&["entanglement", "--config", &cfg]));
    assert_eq!(header(&ent), "t,N_n,N_half,fidelity_vs_prediction");
}

#[test]
fn ingest_converts_field_samples() {
    let dir = tempfile::tempdir().unwrap();
    let field = write_config(
        dir.path(),
        "field.json",
        r#"{"n": 2, "response": [[[0.0, 2.0], [0.4, 1.8]], [[0.4, 1.8], [0.0, 2.0]]]}"#,
    );
    let o = run(&["ingest", "--field", &field]);
    assert!(o.status.success(), "{}", stderr(&o));
    let c = parse_couplings(&stdout(&o)).unwrap();
    assert!((c.gamma()[(0, 1)] - 0.9).abs() < 1e-14);
    assert!((c.g()[(0, 1)] - 0.1).abs() < 1e-14);
    assert_eq!(c.omega0(), 10.0);

    let couplings = write_config(dir.path(), "c.json", &stdout(&o));
    let again = run(&["ingest", "--couplings", &couplings]);
    assert_eq!(stdout(&again), stdout(&o));

    let bad = write_config(
        dir.path(),
        "bad.json",
        r#"{"n": 2, "omega0": 10, "gamma": [[1, 2], [2, 1]], "g": [[0, 0], [0, 0]]}"#,
    );
    let o = run(&["ingest", "--couplings", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: "));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", "{\n  \"n\": 6,\n  \"intial\": {\"kind\": \"w\"}\n}");
    let o = run(&["evolve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("intial") && err.contains("line 3"), "{err}");

    let cfg = write_config(dir.path(), "p.json", r#"{"n": 4, "initial": {"kind": "preset", "name": "r1"}}"#);
    assert_eq!(run(&["evolve", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(run(&["evolve", "--engine", "rk4"]).status.code(), Some(2));
    assert_eq!(run(&["evolve", "--config", "/nonexistent/c.json"]).status.code(), Some(2));
}

#[test]
fn validate_prints_one_line_per_check() {
    let o = run(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().count() >= 10);
    for line in text.lines() {
        let parts: Vec<&str> = line.split(' ').collect();
        assert_eq!(parts.len(), 3, "{line}");
        assert_eq!(parts[1], "pass");
        assert!(parts[2].starts_with("max_err="));
    }
}
