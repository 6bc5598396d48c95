use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Duration;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyroth"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn body(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.split_once('\n').unwrap().1.to_string()
}

#[test]
fn scales_lists_twenty_one_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"degree": 2, "coeffs": {"1": 1}}"#);
    let out = run(dir.path(), &["scales", "--poly", "p.json", "--gamma0", "10", "--window", "-50:50", "--out", "s.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# polyroth-version"));
    assert_eq!(lines.next().unwrap(), "k,dominating_r,in_J1r,good");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101);
    let bad: Vec<i64> = rows
        .iter()
        .filter(|r| r.ends_with(",0"))
        .map(|r| r.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(bad, (-10..=10).collect::<Vec<_>>());
}

#[test]
fn missing_required_flag_exits_two_with_usage() {
    let out = bin().arg("scales").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn schema_errors_name_the_pointer() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"degree": 2, "coeffs": {"1": "one"}}"#);
    let out = run(dir.path(), &["scales", "--poly", "p.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/coeffs/1"));
}

#[test]
fn bad_thread_count_is_a_precondition_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"degree": 2, "coeffs": {}}"#);
    let out = bin().current_dir(dir.path()).env("POLYROTH_THREADS", "zero").args(["scales", "--poly", "p.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_runs_reproduce_and_ignore_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "p.json", r#"{"degree": 2, "coeffs": {}}"#);
    let out = run(d, &["admissible", "--poly", "p.json", "--count", "2", "--theta", "1", "--out", "pairs.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut bodies = Vec::new();
    for (name, threads) in [("a.csv", "4"), ("b.csv", "1")] {
        let out = bin()
            .current_dir(d)
            .env("POLYROTH_THREADS", threads)
            .args(["decay", "--pair", "pairs.json#0", "--m", "6:8", "--trials", "16", "--seed", "3", "--out", name])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        bodies.push(body(&d.join(name)));
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn too_few_resolved_points_exit_three_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["stationary-compare", "--q", "0,0,1", "--xi", "1", "--eta", "1", "--out", "st.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("st.csv").exists());
}

#[test]
fn claim45_needs_a_linear_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["claim45", "--q", "0,1,0.25,0.1", "--b1", "0", "--out", "c.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(v["degree"], serde_json::json!(4));
    let out = run(dir.path(), &["claim45", "--q", "0,1,0.25"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pattern_find_reports_a_verified_instance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "s.json", r#"{"N": 16, "intervals": [[0, 3.2], [9.6, 16]]}"#);
    write(d, "p.json", r#"{"degree": 2, "coeffs": {}}"#);
    let out = run(d, &["patterns", "find", "--set", "s.json", "--poly", "p.json", "--delta", "0.1", "--out", "r.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(v["status"], "found");
    assert_eq!(v["verified"], true);
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
}

#[test]
fn report_merges_and_warns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(d, &["report", "--out", "empty.json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("empty.json")).unwrap()).unwrap();
    assert!(v["warnings"].as_array().unwrap().is_empty());
    assert!(v["decay_fits"].as_array().unwrap().is_empty());

    let version = env!("CARGO_PKG_VERSION");
    let mut args = vec!["report".to_string()];
    for (i, gamma) in [0.5, 0.3, 0.7].into_iter().enumerate() {
        let mut text = format!("# polyroth-version {version} kind=decay seed={i}\nm,log2_norm_max,trials\n");
        for m in 6..=10 {
            text.push_str(&format!("{m},{},64\n", 1.0 - gamma * m as f64));
        }
        let name = format!("decay{i}.csv");
        write(d, &name, &text);
        args.push(name);
    }
    write(d, "old.csv", "# polyroth-version 0.0.0 kind=decay\nm,log2_norm_max,trials\n6,-3,1\n7,-3.5,1\n8,-4,1\n");
    args.extend(["old.csv".into(), "--out".into(), "r.json".into()]);
    let out = bin().current_dir(d).args(&args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    let fits = v["decay_fits"].as_array().unwrap();
    assert_eq!(fits.len(), 4);
    assert!((fits[1]["gamma"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn killed_run_leaves_previous_output_intact() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let target = write(d, "h.csv", "previous\n");
    let mut child = bin()
        .current_dir(d)
        .args(["hormander", "--lambda", "2^12:2^20", "--trials", "8", "--out", "h.csv"])
        .spawn()
        .unwrap();
    std::thread::sleep(Duration::from_millis(300));
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(std::fs::read_to_string(&target).unwrap(), "previous\n");
    let names: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("h.csv")]);
}
