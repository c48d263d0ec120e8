//! End-to-end tests of the `hallforge` binary: exit codes, report
//! determinism, cache behavior, and spot values.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const JORDAN: &str = r#"{"vertices": ["i"], "arrows": [["i", "i"]]}"#;
const B: &str = r#"{"vertices": ["i", "j"], "arrows": [["i", "j"], ["j", "j"]]}"#;

fn write_quiver(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hallforge"))
        .args(args)
        .env_remove("HALLFORGE_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn cartan_reports_matrix_and_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "b.json", B);

    let out = run(&["cartan", q.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("real"));
    assert!(text.contains("imaginary (isotropic)"));
    assert!(text.contains("2   -1"));
    assert!(text.contains("e(j,3)"));

    let out = run(&["cartan", q.to_str().unwrap(), "--output", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["cartan_matrix"], serde_json::json!([[2, -1], [-1, 0]]));
    assert_eq!(v["vertices"][1]["loops"], 1);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "jordan.json", JORDAN);
    let args = [
        "verify-phi",
        q.to_str().unwrap(),
        "--ht",
        "2",
        "--output",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "jordan.json", JORDAN);

    let missing = run(&["cartan", "/nonexistent/quiver.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let composite = run(&["mult", q.to_str().unwrap(), "--word", "i:1", "--q", "6"]);
    assert_eq!(composite.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&composite.stderr).contains("not prime"));

    let unknown = run(&["mult", q.to_str().unwrap(), "--word", "k:1", "--q", "2"]);
    assert_eq!(unknown.status.code(), Some(2));

    let held_out_clash = run(&[
        "p-poly",
        q.to_str().unwrap(),
        "--left",
        "i:1",
        "--right",
        "i:1",
        "--held-out",
        "7",
    ]);
    assert_eq!(held_out_clash.status.code(), Some(2));
}

#[test]
fn budget_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "jordan.json", JORDAN);
    let out = run(&[
        "classify",
        q.to_str().unwrap(),
        "--dims",
        "5",
        "--q",
        "5",
        "--budget",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget exceeded"));
}

#[test]
fn cache_changes_nothing_and_survives_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "jordan.json", JORDAN);
    let cache = dir.path().join("cache");
    let qpath = q.to_str().unwrap();
    let cpath = cache.to_str().unwrap();

    let args = ["delta", qpath, "--word", "i:2,i:1", "--q", "3"];
    let plain = run(&args);
    assert!(plain.status.success());

    let cached = |extra: &[&str]| {
        let mut full: Vec<&str> = args.to_vec();
        full.extend_from_slice(&["--cache-dir", cpath]);
        full.extend_from_slice(extra);
        run(&full)
    };

    let cold = cached(&[]);
    assert!(cold.status.success());
    let warm = cached(&[]);
    assert!(warm.status.success());
    assert_eq!(plain.stdout, cold.stdout);
    assert_eq!(cold.stdout, warm.stdout);

    let files: Vec<_> = fs::read_dir(&cache).unwrap().collect();
    assert_eq!(files.len(), 1, "one store per (quiver, prime, budget)");
    let store = files[0].as_ref().unwrap().path();
    let lines: Vec<String> = fs::read_to_string(&store)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert!(lines.iter().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));

    // Damage one line: the run must warn, recompute, and still agree.
    let mut damaged = lines.clone();
    damaged[2] = "{\"count\": garbage".to_string();
    fs::write(&store, damaged.join("\n")).unwrap();
    let repaired = cached(&[]);
    assert!(repaired.status.success());
    assert_eq!(plain.stdout, repaired.stdout);
    assert!(String::from_utf8_lossy(&repaired.stderr).contains("warning"));
}

#[test]
fn pair_prints_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "jordan.json", JORDAN);
    let out = run(&[
        "pair",
        q.to_str().unwrap(),
        "--left",
        "i:2",
        "--right",
        "i:2",
        "--q",
        "2",
        "--output",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["value"], "8/3");
}

#[test]
fn serre_lists_only_zero_sums() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "b.json", B);
    let out = run(&["serre", q.to_str().unwrap(), "--q", "2"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.ends_with(": 0")));
}

#[test]
fn radical_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "b.json", B);
    let qpath = q.to_str().unwrap();

    let relation = run(&["radical", qpath, "--serre", "i,j,1"]);
    assert!(relation.status.success());
    assert!(stdout_of(&relation).contains("in radical: yes"));

    let word = run(&["radical", qpath, "--word", "j:2"]);
    assert!(word.status.success());
    assert!(stdout_of(&word).contains("in radical: no"));

    let both = run(&["radical", qpath, "--word", "j:2", "--serre", "i,j,1"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn p_poly_reports_interpolant_and_primes() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "b.json", B);
    let out = run(&[
        "p-poly",
        q.to_str().unwrap(),
        "--left",
        "j:1,j:1",
        "--right",
        "j:1,j:1",
        "--output",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["polynomial"], "2");
    assert_eq!(v["held_out_prime"], 11);
    assert_eq!(v["solving_primes"], serde_json::json!([2, 3, 5, 7]));
}

#[test]
fn verify_phi_checks_every_weight() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_quiver(dir.path(), "jordan.json", JORDAN);
    let out = run(&["verify-phi", q.to_str().unwrap(), "--ht", "3"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("s(i,1)·s(i,2): block 2x2, rank 1, match"));
    assert!(text.trim_end().ends_with("overall: verified"));
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("all 12 checks passed"));
}
