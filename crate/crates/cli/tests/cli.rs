use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn twotoda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twotoda")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn build(dir: &TempDir, kind: &str, n: usize) -> String {
    let path = dir.path().join(format!("{kind}{n}.spec"));
    let p = path.to_str().unwrap().to_string();
    let o = twotoda(&["algebra", "build", "--type", kind, "--n", &n.to_string(), "--out", &p]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn build_then_validate() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "sl", 3);
    let o = twotoda(&["algebra", "validate", &p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valid sl3"));
}

#[test]
fn validate_reports_violations_with_exit_1() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "sl", 2);
    // Break tracelessness of the first basis matrix.
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    let entry = &mut doc["basis"][0][0][0];
    *entry = serde_json::json!(entry.as_f64().unwrap() + 1.0);
    let bad = dir.path().join("bad.spec");
    std::fs::write(&bad, doc.to_string()).unwrap();
    let o = twotoda(&["algebra", "validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("violation"));
}

#[test]
fn unreadable_and_malformed_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.spec");
    assert_eq!(twotoda(&["algebra", "validate", missing.to_str().unwrap()]).status.code(), Some(2));
    let junk = dir.path().join("junk.spec");
    std::fs::write(&junk, "{ not json").unwrap();
    assert_eq!(twotoda(&["check", "rank", "--algebra", junk.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(twotoda(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(twotoda(&["algebra", "build", "--type", "sl", "--n", "1", "--out", "x"]).status.code(), Some(2));
    let p = build(&dir, "sl", 2);
    assert_eq!(twotoda(&["check", "nonsense", "--algebra", &p]).status.code(), Some(2));
    assert_eq!(twotoda(&["check", "rank", "--algebra", &p, "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn check_all_on_sl3_passes() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "sl", 3);
    let o = twotoda(&["check", "all", "--algebra", &p, "--seed", "42"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().count() > 20);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn json_reports_are_deterministic_and_carry_rank_values() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "sl", 3);
    let a = twotoda(&["check", "rank", "--algebra", &p, "--format", "json", "--seed", "7"]);
    let b = twotoda(&["check", "rank", "--algebra", &p, "--format", "json", "--seed", "7", "--sequential"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("\"measured\": 10.0"));
    assert!(text.contains("\"expected\": 10.0"));
}

#[test]
fn failing_check_exits_1_and_prints_anchor() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "sl", 2);
    // An absurd tolerance forces the residual checks to fail.
    let o = twotoda(&["check", "casimir", "--algebra", &p, "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("FAIL casimir"), "{text}");
    assert!(text.contains("Casimir"));
}

#[test]
fn report_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "gl", 2);
    let out = dir.path().join("report.json");
    let o = twotoda(&["check", "mcybe", "--algebra", &p, "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&o));
}

fn csv_times(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,x_1"));
    lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect()
}

#[test]
fn flow_run_writes_monotone_csv() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "gl", 3);
    let out = dir.path().join("traj.csv");
    let o = twotoda(&["flow", "run", "--algebra", &p, "--field", "t", "--dt", "1e-3", "--T", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let times = csv_times(&out);
    assert_eq!(times.len(), 1001);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert!((times.last().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn flow_run_toda_and_bad_field() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "sl", 3);
    let out = dir.path().join("toda.csv");
    let o = twotoda(&["flow", "run", "--algebra", &p, "--field", "toda", "--dt", "1e-2", "--T", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_times(&out).len(), 51);
    let o = twotoda(&["flow", "run", "--algebra", &p, "--field", "wave", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = twotoda(&["flow", "run", "--algebra", &p, "--field", "t", "--dt", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flow_commutation_reports_small_defect() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "gl", 2);
    let o = twotoda(&["flow", "commutation", "--algebra", &p, "--samples", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS flow.commutation gl2"));
    let o = twotoda(&[
        "flow", "commutation", "--algebra", &p, "--a", "quadratic(0,0)", "--b", "quadratic(1,0.5)", "--samples", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
