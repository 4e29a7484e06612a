use std::path::Path;
use std::process::{Command, Output};

use redac::metrics::{pev, rre};
use redac::{center_columns, io};

fn redac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redac"))
        .args(args)
        .output()
        .expect("spawn redac")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn hastie_dump(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("hastie.csv");
    let out = redac(&["gen", "hastie", "--n", "1000", "--seed", "3", "--out", s(&path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn fit_on_hastie_prints_ground_truth_supports() {
    let dir = tempfile::tempdir().unwrap();
    let data = hastie_dump(dir.path());
    let out = redac(&["fit", s(&data), "--r", "2", "--norm", "l0", "--budgets", "4,4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("support {5,6,7,8}"), "{text}");
    assert!(text.contains("support {1,2,3,4}"), "{text}");
}

#[test]
fn written_loadings_reproduce_reported_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let data = hastie_dump(dir.path());
    let out_dir = dir.path().join("fit");
    let out = redac(&[
        "fit", s(&data), "--r", "2", "--norm", "l1", "--budgets", "1.8", "--out", s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    let v = io::read_matrix(out_dir.join("V.csv")).unwrap();
    assert_eq!(v.header.unwrap(), vec!["v1", "v2"]);
    let x = center_columns(&io::read_matrix(&data).unwrap().values).unwrap();
    let r = rre(&x, &v.values).unwrap();
    let p = pev(&x, &v.values).unwrap();
    assert!((r - report["rre"].as_f64().unwrap()).abs() <= 1e-12);
    assert!((p - report["pev"].as_f64().unwrap()).abs() <= 1e-12 * 100.0);
    assert!(!report["solver"]["objectives"].as_array().unwrap().is_empty());
}

#[test]
fn infeasible_budget_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = hastie_dump(dir.path());
    let out = redac(&["fit", s(&data), "--r", "2", "--norm", "l1", "--budgets", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn usage_and_runtime_exit_codes() {
    assert_eq!(redac(&["fit", "--bogus"]).status.code(), Some(1));
    assert_eq!(redac(&["nonsense"]).status.code(), Some(1));
    assert_eq!(redac(&[]).status.code(), Some(1));
    assert_eq!(redac(&["--help"]).status.code(), Some(0));
    assert_eq!(redac(&["verify", "--dim-max", "40"]).status.code(), Some(1));

    let out = redac(&["fit", "/definitely/not/here.csv", "--r", "1", "--budgets", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,2\n3\n").unwrap();
    let out = redac(&["fit", s(&ragged), "--r", "1", "--budgets", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn verify_command_passes() {
    let out = redac(&["verify", "--cases", "1000", "--dim-max", "10", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3, "{text}");
}

#[test]
fn experiment_command_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &spec,
        serde_json::json!({
            "kind": "nonneg_toy", "replicates": 5, "sample_sizes": [500],
            "budgets": [5, 5], "norm": "l0", "seed": 9, "output_path": out_dir,
        })
        .to_string(),
    )
    .unwrap();
    let out = redac(&["experiment", s(&spec)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["summary.csv", "replicates.csv", "manifest.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let replicates = std::fs::read_to_string(out_dir.join("replicates.csv")).unwrap();
    assert_eq!(replicates.lines().count(), 6);

    std::fs::write(&spec, r#"{"kind":"toy","replicates":0}"#).unwrap();
    assert_eq!(redac(&["experiment", s(&spec)]).status.code(), Some(2));
    std::fs::write(
        &spec,
        r#"{"kind":"toy","replicates":0,"sample_sizes":[500],"budgets":[6,6],
            "norm":"l0","seed":1,"output_path":"unused"}"#,
    )
    .unwrap();
    assert_eq!(redac(&["experiment", s(&spec)]).status.code(), Some(1));
}

#[test]
fn gen_toys_have_ten_columns() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["toy", "nntoy"] {
        let path = dir.path().join(format!("{kind}.csv"));
        let out = redac(&["gen", kind, "--n", "50", "--seed", "1", "--out", s(&path)]);
        assert!(out.status.success());
        let m = io::read_matrix(&path).unwrap();
        assert_eq!(m.values.shape(), (50, 10));
    }
}
