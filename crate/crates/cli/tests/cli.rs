use std::process::{Command, Output};

use serde_json::Value;

fn braidwork(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_braidwork"))
        .args(args)
        .env_remove("BRAIDWORK_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    braidwork(args).status.code().expect("exited normally")
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["e1", "--bogus"]), 2);
    assert_eq!(code(&["e1", "--ring", "zp:1"]), 2);
    assert_eq!(code(&["e1", "--ring", "zp:4"]), 2);
    assert_eq!(code(&["pi", "--ring", "zp:2"]), 2);
    assert_eq!(code(&["verify", "nothing"]), 2);
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&["--help"]), 0);
    let out = braidwork(&["--version"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("report.json");
    let out = braidwork(&["verify-simplicial", "--n-max", "2", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn json_report_shape() {
    let out = braidwork(&["e1", "--t-max", "4", "--n-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "e1");
    assert_eq!(v["config"]["t_max"], 4);
    assert!(v["config"].get("jobs").is_none());
    assert_eq!(v["wall_time_ms"], Value::Null);
    let e1 = v["e1"].as_array().unwrap();
    assert_eq!(e1.len(), 12);
    let z2 = e1.iter().find(|r| r["t"] == 4 && r["n"] == 3).unwrap();
    assert_eq!(z2["free_rank"], 0);
    assert_eq!(z2["torsion"], serde_json::json!([2]));
    assert!(out.stdout.ends_with(b"\n"));
}

#[test]
fn text_format_and_shorthand() {
    let out = braidwork(&["verify", "simplicial", "--n-max", "2", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("braidwork verify-simplicial"));
    assert!(text.lines().any(|l| l.starts_with("PASS")));
}

#[test]
fn reports_do_not_depend_on_jobs_or_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["verify-braid", "--n-max", "3", "--dim-max", "3", "--samples", "200", "--seed", "11"];
    let mut first: Vec<&str> = args.to_vec();
    first.extend(["--jobs", "1", "--out", a.to_str().unwrap()]);
    let mut second: Vec<&str> = args.to_vec();
    second.extend(["--jobs", "2", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&first), 0);
    assert_eq!(code(&second), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let stdout = braidwork(&args).stdout;
    assert_eq!(stdout, std::fs::read(&a).unwrap());
}

#[test]
fn strict_turns_undetermined_into_failure() {
    // over F2 the connectivity check is reported as undetermined
    assert_eq!(code(&["e1", "--t-max", "3", "--n-max", "2", "--ring", "zp:2"]), 0);
    assert_eq!(code(&["e1", "--t-max", "3", "--n-max", "2", "--ring", "zp:2", "--strict"]), 1);
}

#[test]
fn timing_fills_wall_time() {
    let out = braidwork(&["verify-prop21", "--n-max", "2", "--timing"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["wall_time_ms"].is_u64());
}
