use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parafermion")).args(args).output().expect("spawn")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn solve_passes_and_embeds_config() {
    let out = run(&["solve", "--model", "dense", "--gamma", "0.7", "--alpha", "1.1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["verb"], "solve");
    assert_eq!(v["config"]["model"], "dense");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["solve", "--model", "bogus", "--alpha", "1"][..],
        &["solve", "--model", "dense", "--eta", "0.7", "--alpha", "1"],
        &["solve", "--model", "dense"],
        &["frobnicate"],
        &["cg", "--grid", "nonsense"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn tolerance_failures_exit_one() {
    let out = run(&["holo-verify", "--model", "dense", "--gamma", "0.7", "--alpha", "1.1", "--perturb", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
    // degenerate fugacity n^2 = 1 makes the C2 determinant vanish identically
    let out = run(&["det-scan", "--model", "c2", "--eta", "1.0471975512", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["identically_zero"], true);
}

#[test]
fn numbers_carry_seventeen_digits() {
    let out = run(&["cg", "--grid", "gamma:0:1:3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(2).unwrap();
    let first = row.split(',').next().unwrap();
    assert_eq!(first, "5.0000000000000000e-1");
}

#[test]
fn report_aggregates_runs() {
    let dir = std::env::temp_dir().join(format!("pf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("a.json");
    let out = run(&["solve", "--model", "dilute", "--eta", "0.9", "--alpha", "1.1", "--out", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rep = run(&["report", a.to_str().unwrap()]);
    assert_eq!(rep.status.code(), Some(0));
    let v = json(&rep);
    assert_eq!(v["runs"][0]["verb"], "solve");
    assert_eq!(v["runs"][0]["pass"], true);
    std::fs::remove_dir_all(&dir).ok();
}
