use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lra")).args(args).output().expect("binary runs")
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = lra(&[
        "analyze",
        corpus("div_fig1.imp").to_str().unwrap(),
        "--dump-recurrences",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("proved"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    for key in ["file", "config", "assertions", "loops"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["assertions"][0]["verdict"], "proved");
    assert_eq!(v["assertions"][0]["line"], 13);
    let loops = v["loops"].as_array().unwrap();
    assert_eq!(loops.len(), 2);
    assert!(loops.iter().all(|l| l["header_line"].is_u64() && l["closed_forms"].is_array()));
}

#[test]
fn flags_reach_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let out = lra(&[
        "analyze",
        corpus("count_up.imp").to_str().unwrap(),
        "--guard",
        "interval",
        "--no-inequations",
        "--no-stratified",
        "--max-stratum",
        "2",
        "--timeout-ms",
        "5000",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let it = &v["config"]["iteration"];
    assert_eq!(it["guard"], "interval");
    assert_eq!(it["inequations"], false);
    assert_eq!(it["stratified"], false);
    assert_eq!(it["max_stratum"], 2);
    assert_eq!(v["config"]["solver"]["timeout_ms"], 5000);
}

#[test]
fn unsafe_program_that_gets_proved_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("mislabeled.imp");
    std::fs::write(&f, "// expect: unsafe\nvar x;\nx := 1;\nassert(x = 1);\n").unwrap();
    assert_eq!(lra(&["analyze", f.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(lra(&["corpus", dir.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(lra(&[]).status.code(), Some(3));
    assert_eq!(lra(&["analyze"]).status.code(), Some(3));
    assert_eq!(lra(&["analyze", "x.imp", "--guard", "octagon"]).status.code(), Some(3));
    assert_eq!(lra(&["analyze", "/nonexistent/file.imp"]).status.code(), Some(3));
    assert_eq!(lra(&["analyze", corpus("count_up.imp").to_str().unwrap(), "--solver", "/nonexistent/solver"]).status.code(), Some(3));
}

#[test]
fn parse_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.imp");
    std::fs::write(&f, "var x; x := ;").unwrap();
    let out = lra(&["analyze", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn simulate_is_reproducible() {
    let file = corpus("div_fig1.imp");
    let a = lra(&["simulate", file.to_str().unwrap(), "--seed", "4", "--steps", "300"]);
    let b = lra(&["simulate", file.to_str().unwrap(), "--seed", "4", "--steps", "300"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("outcome"));
}

#[test]
fn corpus_reports_every_file() {
    let out = lra(&["corpus", corpus("").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let n = std::fs::read_dir(corpus("")).unwrap().count();
    assert_eq!(text.lines().filter(|l| l.contains(".imp")).count(), n);
    assert!(text.contains("safe proved"));
}
