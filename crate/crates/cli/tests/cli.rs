use std::path::Path;
use std::process::{Command, Output};

fn fockswap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockswap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn hom_reports_bunching() {
    let out = fockswap(&["hom"]);
    assert!(out.status.success());
    let v = json(&out);
    let rows = v["results"].as_array().unwrap();
    let p = |i: usize| rows[i]["probability"].as_f64().unwrap();
    assert!((p(0) - 0.5).abs() < 1e-12);
    assert!(p(1).abs() < 1e-12);
    assert!((p(2) - 0.5).abs() < 1e-12);
}

#[test]
fn transfer_reports_eight_unit_fidelity_branches() {
    let out = fockswap(&["transfer", "--c-re", "0.8", "--d-re", "0.6"]);
    assert!(out.status.success());
    let v = json(&out);
    let branches = v["results"]["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 8);
    for b in branches {
        assert!((b["fidelity_to_target"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
    let claim = &v["paper_claims"][0];
    assert_eq!(claim["id"], "transfer_success_probability");
    assert_eq!(claim["paper_value"].as_f64().unwrap(), 0.125);
    let direct = v["results"]["total_success_probability"].as_f64().unwrap();
    let oracle = v["results"]["oracle_success_probability"].as_f64().unwrap();
    assert!((direct - oracle).abs() < 1e-10);
}

#[test]
fn complex_values_use_re_im_objects() {
    let v = json(&fockswap(&["swap"]));
    let amp = &v["results"]["patterns"][0]["conditional_state"]["amps"][0];
    assert!(amp["re"].is_number() && amp["im"].is_number());
    assert!(v["config_echo"]["params"]["a"]["re"].is_number());
}

#[test]
fn verify_passes_on_clean_build() {
    let out = fockswap(&["verify", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    assert!(!stderr.contains("FAIL"));
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = fockswap(&["swap", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed config"));

    std::fs::write(&path, r#"{"unknown_field": 1}"#).unwrap();
    assert_eq!(
        fockswap(&["swap", "--config", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn zero_parameters_exit_with_two() {
    let out = fockswap(&["swap", "--a-re", "0", "--b-re", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"command": "transfer", "params": {"a": {"re": 0.6, "im": 0}, "b": {"re": 0.8, "im": 0},
            "c": {"re": 1, "im": 0}, "d": {"re": 0, "im": 0}}, "seed": 5}"#,
    )
    .unwrap();
    let out = fockswap(&[
        "transfer",
        "--config",
        path.to_str().unwrap(),
        "--a-re",
        "0.8",
        "--b-re",
        "0.6",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["config_echo"]["params"]["a"]["re"].as_f64().unwrap(), 0.8);
    assert_eq!(v["config_echo"]["params"]["c"]["re"].as_f64().unwrap(), 1.0);
    assert_eq!(v["config_echo"]["seed"].as_u64().unwrap(), 5);
    // a ≠ b triggers the correction-table warning.
    assert_eq!(v["results"]["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn hand_typed_parameters_renormalized_with_warning() {
    let out = fockswap(&["transfer", "--c-re", "0.8", "--d-re", "0.61"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("renormalized"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        &["swap", "--herald", "d4"][..],
        &["sweep", "--samples", "6", "--seed", "11"][..],
    ] {
        let a = fockswap(args);
        let b = fockswap(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn sweep_rows_follow_grid_order() {
    let out = fockswap(&["sweep", "--grid", "3", "--protocol", "swap", "--format", "csv"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let indices: Vec<usize> = reader.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(indices, (0..9).collect::<Vec<_>>());
}

#[test]
fn out_flag_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("branches.csv");
    let out = fockswap(&["transfer", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert!(text.starts_with("detector,alice_path,probability"));
    assert_eq!(text.lines().count(), 9);
}
