use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const GOOD: &str = "\
[electron]
g = 2.0023

[sequence]
carrier = 240 GHz
tau = 600 ns

[sweep]
field = 8.55 T .. 8.58 T / 7
seed = 4

[noise]
sigma = 1e9

[output]
format = json
path = sweep.json
";

fn hfepr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfepr")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_reports_exit_codes_and_positions() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.exp", GOOD);
    assert_eq!(hfepr(&["validate", &good]).status.code(), Some(0));

    let bad = write(dir.path(), "bad.exp", &GOOD.replace("tau = 600 ns", "tau = 600 nss"));
    let out = hfepr(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("bad.exp:6:11:"), "{stderr}");
}

#[test]
fn run_writes_declared_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "good.exp", GOOD);
    let out_dir = dir.path().join("out");
    let out = out_dir.to_str().unwrap();
    assert_eq!(hfepr(&["run", &file, "--out", out]).status.code(), Some(0));
    let first = fs::read(out_dir.join("sweep.json")).unwrap();
    assert_eq!(hfepr(&["run", &file, "--out", out]).status.code(), Some(0));
    assert_eq!(fs::read(out_dir.join("sweep.json")).unwrap(), first);

    assert_eq!(hfepr(&["run", &file, "--out", out, "--seed", "5"]).status.code(), Some(0));
    assert_ne!(fs::read(out_dir.join("sweep.json")).unwrap(), first);
}

#[test]
fn format_flag_overrides_declared_format() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "plain.exp", &GOOD[..GOOD.find("[output]").unwrap()]);
    let out_dir = dir.path().join("o");
    let status = hfepr(&["run", &file, "--out", out_dir.to_str().unwrap(), "--format", "csv"]).status;
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out_dir.join("plain.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "field [T],value"));
}

#[test]
fn describe_prints_derived_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "good.exp", GOOD);
    let out = hfepr(&["describe", &file]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["B1", "pi/2", "wall time"] {
        assert!(text.contains(needle), "{needle} missing from\n{text}");
    }
}

#[test]
fn simulation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let src = "\
[electron]
spin = 5/2
g = 2.0

[nucleus]
spin = 1/2
gn = 5.58
a = 1 MHz

[sequence]
kind = mims_endor
carrier = 240 GHz
tau = 600 ns

[sweep]
rf = 360 MHz .. 370 MHz / 10
";
    let file = write(dir.path(), "s52.exp", src);
    let out = hfepr(&["run", &file, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
