use std::path::Path;
use std::process::{Command, Output};

use isac_harness::COLUMNS;

fn isac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isac")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn validate_accepts_presets_and_minimal_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(isac(&["validate", "--config", "preset:baseline"]).status.success());
    let f = write(dir.path(), "min.json", "{}");
    let o = isac(&["validate", "--config", &f]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("k=10"));
    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/presets/baseline.json");
    assert!(isac(&["validate", "--config", shipped]).status.success());
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    for (text, needle) in [
        (r#"{"n_tx": 2}"#, "n_tx"),
        (r#"{"bandwidth": 1e8, "delta_t": 1e-8}"#, "1/(2B)"),
        (r#"{"p_t": true}"#, "p_t"),
        ("{", "malformed"),
    ] {
        let f = write(dir.path(), "bad.json", text);
        let o = isac(&["validate", "--config", &f]);
        assert_eq!(o.status.code(), Some(1), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{text}: {err}");
    }
    assert_eq!(isac(&["validate", "--config", "/nonexistent/x.json"]).status.code(), Some(1));
    assert_eq!(isac(&["run", "--config", "preset:quick", "--experiment", "nope"]).status.code(), Some(1));
    assert_eq!(
        isac(&["run", "--config", "preset:quick", "--experiment", "roundtrip", "--trials", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(isac(&[]).status.code(), Some(1));
    assert_eq!(isac(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rt.csv");
    let o = isac(&[
        "run", "--config", "preset:quick", "--experiment", "roundtrip", "--trials", "3", "--seed", "5", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
    assert_eq!(lines.count(), 6);

    let o = isac(&["run", "--config", "preset:quick", "--experiment", "roundtrip", "--seed", "5", "--sweep", "v=5,15"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(1).unwrap().starts_with("5,0,"));
}

#[test]
fn timing_is_opt_in() {
    let args = ["run", "--config", "preset:quick", "--experiment", "roundtrip", "--seed", "1"];
    let plain = String::from_utf8(isac(&args).stdout).unwrap();
    let fields: Vec<&str> = plain.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[9], "");
    let mut timed = args.to_vec();
    timed.push("--timing");
    let t = String::from_utf8(isac(&timed).stdout).unwrap();
    let fields: Vec<&str> = t.lines().nth(1).unwrap().split(',').collect();
    assert!(fields[9].parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn all_rows_failing_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "hard.json", r#"{"k": 4, "m": 512, "r_th": 50}"#);
    let o = isac(&["run", "--config", &f, "--experiment", "antennas_rx", "--sweep", "n_r=2"]);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with("no receiver group satisfies the rate and cost constraints"));
}

#[test]
fn presets_lists_everything() {
    let o = isac(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["baseline", "quick", "tradeoff", "antennas_tx", "antennas_rx", "selection_compare", "pulses", "mf_vs_crb", "roundtrip"] {
        assert!(text.contains(name), "{name}");
    }
    let o = isac(&["presets", "--show", "baseline"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), include_str!("../presets/baseline.json"));
}
