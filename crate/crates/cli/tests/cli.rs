use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const DEFAULT: &str = include_str!("../config/default.toml");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alphaframe"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn covering_at_alpha_zero_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--alpha", "0", "--out", "o", "covering"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(dir.path().join("o/covering.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["j", "p", "s", "left", "right"]);
    let mut rows = 0;
    for r in rd.deserialize::<(i64, f64, f64, f64, f64)>() {
        let (j, p, s, _, _) = r.unwrap();
        assert_eq!(p, j as f64);
        assert_eq!(s, 1.0);
        rows += 1;
    }
    assert!(rows > 10);
    let rep = json(&dir.path().join("o/covering.json"));
    assert_eq!(rep["passed"], true);
    assert_eq!(rep["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn lattice_parameter_above_one_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--a", "1.2", "covering"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("0<a≤1"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn every_violation_is_listed() {
    let dir = tempfile::tempdir().unwrap();
    let text = DEFAULT.replace("a = 0.36", "a = 2.0").replace("b = 1.0", "b = -1.0").replace("q = 2.0", "q = 0.5");
    let cfg = write_config(dir.path(), &text);
    let o = run(dir.path(), &["--config", &cfg, "covering"]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    for needle in ["0<a≤1", "b>0", "q = 0.5"] {
        assert!(err.contains(needle), "{needle} missing from {err}");
    }
}

#[test]
fn unknown_key_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{DEFAULT}\nwidth = 3\n"));
    assert_eq!(code(&run(dir.path(), &["--config", &cfg, "covering"])), 1);
    assert_eq!(code(&run(dir.path(), &["--config", "absent.toml", "covering"])), 1);
}

#[test]
fn identical_config_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["r1", "r2"] {
        for cmd in [&["covering"][..], &["bapu-check", "--windows"], &["analyze"], &["transform"], &["norms"]] {
            let mut args = vec!["--seed", "5", "--out", out];
            args.extend_from_slice(cmd);
            let o = run(dir.path(), &args);
            assert_eq!(code(&o), 0, "{cmd:?}: {}", stderr(&o));
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(dir.path().join("r1")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        let a = std::fs::read(dir.path().join("r1").join(&name)).unwrap();
        let b = std::fs::read(dir.path().join("r2").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
    let o = run(dir.path(), &["--seed", "6", "--out", "r3", "analyze"]);
    assert_eq!(code(&o), 0);
    assert_ne!(json(&dir.path().join("r1/analyze.json"))["config_hash"], json(&dir.path().join("r3/analyze.json"))["config_hash"]);
}

#[test]
fn atom_file_round_trips_through_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--out", "o", "atoms", "--j", "-2", "--k", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(dir.path(), &["--out", "o", "reconstruct", "--input", "o/atom_-2_3.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep = json(&dir.path().join("o/reconstruct.json"));
    assert!(rep["relative_error"].as_f64().unwrap() < 1e-8, "{rep}");
    let mut rd = csv::Reader::from_path(dir.path().join("o/dual_coefficients.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["j", "k", "re", "im"]);
    assert!(rd.records().count() > 100);
}

#[test]
fn input_on_another_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["--out", "o", "atoms", "--j", "0"])), 0);
    let cfg = write_config(dir.path(), &DEFAULT.replace("n = 2048", "n = 1024"));
    let o = run(dir.path(), &["--config", &cfg, "analyze", "--input", "o/atom_0_0.csv"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("config grid"), "{}", stderr(&o));
}

#[test]
fn stalled_solver_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &DEFAULT.replace("max_iter = 500", "max_iter = 1").replace("tol = 1e-9", "tol = 1e-15"));
    let o = run(dir.path(), &["--config", &cfg, "--out", "o", "reconstruct"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&dir.path().join("o/reconstruct.json"))["converged"], false);
}

#[test]
fn out_of_range_atom_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["atoms", "--j", "400"])), 1);
}

#[test]
fn verify_all_on_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--out", "o", "verify-all"]);
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let rep = json(&dir.path().join("o/verify.json"));
    assert_eq!(rep["passed"], true);
    let criteria = rep["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 13);
    assert!(criteria.iter().all(|c| c["passed"] == true));
}
