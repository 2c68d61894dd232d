//! End-to-end tests of the `oscbath` binary: exit-code contract, CSV
//! round-tripping, flag overrides, and cross-command consistency.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oscbath"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

const BOUNDED: &str = "\
[oscillator]
m = 1.0
omega = 1.0

[bath]
type = explicit
mode = 1.0 0.5
";

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn check_bounded_model_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BOUNDED);
    let out = bin().args(["check", "--config"]).arg(&cfg).output().unwrap();
    let text = stdout(&out);
    assert!(text.contains("bounded: true"), "{text}");
    assert!(text.contains("H_cm IO-form: true"), "{text}");
    assert!(text.contains("H_rel IO-form: false"), "{text}");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn check_unbounded_model_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BOUNDED.replace("mode = 1.0 0.5", "mode = 1.0 2.0"));
    let out = bin().args(["check", "--config"]).arg(&cfg).output().unwrap();
    assert!(stdout(&out).contains("bounded: false"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_empty_bath_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BOUNDED.replace("mode = 1.0 0.5\n", ""));
    let out = bin().args(["check", "--config"]).arg(&cfg).output().unwrap();
    assert!(stdout(&out).contains("bounded: true"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_config_exits_one_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BOUNDED.replace("omega = 1.0", "omega = fast"));
    let out = bin().args(["check", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("omega"), "{err}");
}

#[test]
fn missing_config_file_exits_one() {
    let out = bin()
        .args(["check", "--config", "/nonexistent/run.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_flag_exits_one() {
    let out = bin().args(["check", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BOUNDED);
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .args(["--out", "/nonexistent/dir/out.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn covariance_matches_oracle_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BOUNDED);
    let out = bin()
        .args(["covariance", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = data_lines(&text)
        .into_iter()
        .find(|l| l.starts_with("x1,x2,"))
        .expect("cross row present");
    let value: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((value - 0.0327580358034964).abs() < 1e-10, "{value}");
}

#[test]
fn csv_values_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BOUNDED);
    let out = bin()
        .args(["kernel", "--config"])
        .arg(&cfg)
        .args(["--t-max", "1", "--dt", "0.25"])
        .output()
        .unwrap();
    let text = stdout(&out);
    let lines = data_lines(&text);
    assert_eq!(lines[0], "t,mu");
    for line in &lines[1..] {
        for cell in line.split(',') {
            let v: f64 = cell.parse().expect("numeric cell");
            // 17 significant digits reproduce the value exactly.
            assert_eq!(format!("{v:.16e}"), cell);
        }
    }
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BOUNDED);
    let run = || {
        let out = bin()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .args(["--t-max", "0.08", "--dt", "0.04", "--n-traj", "20", "--seed", "11"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        stdout(&out)
    };
    let a = run();
    let b = run();
    assert_eq!(data_lines(&a), data_lines(&b));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BOUNDED);
    let target = dir.path().join("spectrum.csv");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("mode,frequency,squared_frequency"));
}

#[test]
fn one_step_sweep_matches_covariance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BOUNDED);
    let sweep = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--param", "temperature", "--from", "0.5", "--to", "0.5", "--steps", "1"])
        .output()
        .unwrap();
    assert_eq!(sweep.status.code(), Some(0));
    let sweep_text = stdout(&sweep);
    let sweep_row = data_lines(&sweep_text)[1];
    let swept: f64 = sweep_row.split(',').nth(1).unwrap().parse().unwrap();

    let cov = bin()
        .args(["covariance", "--config"])
        .arg(&cfg)
        .args(["--temperature", "0.5"])
        .output()
        .unwrap();
    let cov_text = stdout(&cov);
    let row = data_lines(&cov_text)
        .into_iter()
        .find(|l| l.starts_with("x1,x2,"))
        .unwrap();
    let direct: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(swept, direct);
}

#[test]
fn simulate_with_no_equilibrium_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BOUNDED.replace("mode = 1.0 0.5", "mode = 1.0 2.0"));
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--t-max", "0.05", "--dt", "0.01", "--n-traj", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
