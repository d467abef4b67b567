//! End-to-end tests of the `riemap` binary: exit codes, report files,
//! determinism, and error messages.

use std::process::{Command, Output};

fn riemap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riemap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn clean_scenario_exits_zero_with_summary_table() {
    let out = riemap(&[
        "check",
        "gallery:paper_example",
        "--points",
        "25",
        "--seed",
        "42",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("scenario: paper_example"));
    assert!(text.contains("riemannian_defect"));
    assert!(text.contains("overall: pass"));
    assert!(text.contains("expected outcome: matched"));
}

#[test]
fn negative_control_matches_expectation_and_exits_zero() {
    let out = riemap(&["check", "gallery:anti_holomorphic", "--points", "25"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("holomorphy_defect"));
    assert!(text.contains("FAIL"));
    assert!(text.contains("overall: fail"));
    assert!(text.contains("expected outcome: matched"));
}

#[test]
fn undeclared_failure_exits_one() {
    // same control without its expected-failure declaration must exit 1
    let mut manifest = riemap::gallery::builtin_scenario("non_riemannian").unwrap();
    manifest.expected.clear();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("undeclared.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();

    let out = riemap(&["check", path.to_str().unwrap(), "--points", "10"]);
    assert_eq!(out.status.code(), Some(1), "stdout: {}", stdout(&out));
    assert!(stdout(&out).contains("failure: riemannian_defect"));
}

#[test]
fn missing_file_exits_two() {
    let out = riemap(&["check", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("file not found"));
}

#[test]
fn unknown_gallery_name_exits_two() {
    let out = riemap(&["check", "gallery:does_not_exist"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("paper_example"));
}

#[test]
fn invalid_manifest_lists_all_errors() {
    let mut manifest = riemap::gallery::builtin_scenario("paper_example").unwrap();
    manifest.map.pop();
    manifest.source.metric[0][0] = "1 +".into();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();

    let out = riemap(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("map: expected 4"), "{err}");
    assert!(err.contains("source.metric[0][0]"), "{err}");
}

#[test]
fn unknown_check_flag_exits_two() {
    let out = riemap(&["check", "gallery:paper_example", "--checks", "lemma_9_9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gauss_equation"));
}

#[test]
fn check_subset_runs_only_requested_checks() {
    let out = riemap(&[
        "check",
        "gallery:graph_with_kernel",
        "--points",
        "10",
        "--checks",
        "riemannian_defect,gauss_equation",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("riemannian_defect"));
    assert!(text.contains("gauss_equation"));
    assert!(!text.contains("holomorphy_defect"));
}

#[test]
fn gallery_list_prints_every_entry() {
    let out = riemap(&["gallery", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in [
        "paper_example",
        "kahler_graph",
        "graph_with_kernel",
        "flat_submersion",
        "parabola_graph",
        "anti_holomorphic",
        "non_riemannian",
        "non_kahler_source",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
    assert!(text.contains("expected"));
}

#[test]
fn report_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = riemap(&[
            "check",
            "gallery:kahler_graph",
            "--points",
            "20",
            "--seed",
            "7",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b);

    // the report is valid JSON with the documented top-level fields
    let parsed: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    for field in ["scenario", "mode", "seed", "points", "tolerances", "overall", "checks"] {
        assert!(parsed.get(field).is_some(), "missing field {field}");
    }
    assert!(parsed.get("timestamp").is_none());
}

#[test]
fn timestamp_flag_adds_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stamped.json");
    let out = riemap(&[
        "check",
        "gallery:flat_submersion",
        "--points",
        "10",
        "--report",
        path.to_str().unwrap(),
        "--timestamp",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let parsed: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert!(parsed.get("timestamp").is_some());
}

#[test]
fn fd_mode_flag_runs_finite_differences() {
    let out = riemap(&[
        "check",
        "gallery:kahler_graph",
        "--points",
        "10",
        "--mode",
        "fd",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("mode: fd"));
}

#[test]
fn tolerance_overrides_are_applied() {
    // an absurdly tight tolerance makes even the flat scenario fail
    let out = riemap(&[
        "check",
        "gallery:kahler_graph",
        "--points",
        "10",
        "--tol",
        "1e-30",
        "--rel-tol",
        "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(1), "stdout: {}", stdout(&out));
}

#[test]
fn usage_error_exits_two() {
    let out = riemap(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kahler_checks_on_non_kahler_control_pass_with_skips() {
    let mut manifest = riemap::gallery::builtin_scenario("non_kahler_source").unwrap();
    manifest.expected.clear();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("control.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();

    let out = riemap(&[
        "check",
        path.to_str().unwrap(),
        "--points",
        "10",
        "--checks",
        "harmonicity_equivalence,kahler_sff_commutation",
    ]);
    assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("SKIP"));
    assert!(text.contains("overall: pass_with_skips"));
}

#[test]
fn shipped_manifest_file_runs_from_the_command_line() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("manifests/graph_with_kernel.json");
    let out = riemap(&["check", path.to_str().unwrap(), "--points", "15"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("overall: pass"));
}
