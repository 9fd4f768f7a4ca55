use nlverify::report::REPORT_SCHEMA;
use serde_json::Value;
use std::process::{Command, Output};

fn nlverify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlverify")).args(args).output().expect("binary runs")
}

fn schema() -> jsonschema::JSONSchema {
    let s: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    jsonschema::JSONSchema::options().with_draft(jsonschema::Draft::Draft202012).compile(&s).unwrap()
}

fn check<'a>(report: &'a Value, id: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["check_id"] == id).unwrap_or_else(|| panic!("no check {id}"))
}

#[test]
fn constants_at_half_reports_unit_torsion_constant() {
    let out = nlverify(&["run", "constants", "--n", "1", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(schema().is_valid(&r));
    assert_eq!(r["schema_version"], "1.0");
    assert_eq!(r["params"]["n"], 1);
    let g = check(&r, "constants.gamma_torsion");
    assert!((g["computed"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(g["pass"], true);
    assert!(g["metadata"]["c_normalization"].is_string());
}

#[test]
fn ellipsoid_limit_within_two_percent() {
    let out = nlverify(&["run", "ellipsoid", "--n", "2", "--s", "0.5", "--eps", "0.02,0.01,0.005"]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let c = check(&r, "ellipsoid.limit_ratio");
    let want = 2.0 / (3f64.sqrt() * std::f64::consts::PI);
    assert!((c["computed"].as_f64().unwrap() / want - 1.0).abs() < 0.02);
}

#[test]
fn schema_rejects_malformed_reports() {
    let out = nlverify(&["run", "counterexamples"]);
    let mut r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let sch = schema();
    assert!(sch.is_valid(&r));
    r["checks"][0]["pass"] = Value::String("yes".into());
    assert!(!sch.is_valid(&r));
    r.as_object_mut().unwrap().remove("schema_version");
    assert!(!sch.is_valid(&r));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(nlverify(&["run", "bogus"]).status.code(), Some(2));
    assert_eq!(nlverify(&["run", "constants", "--s", "1.5"]).status.code(), Some(2));
    assert_eq!(nlverify(&["explain", "zzz"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_three() {
    let out = nlverify(&["run", "counterexamples", "--out", "/nonexistent-dir/r.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn failing_checks_exit_one() {
    let out = nlverify(&["run", "counterexamples", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
}

#[test]
fn explain_known_ids() {
    let out = nlverify(&["explain", "barrier.lens_identity"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("2(n+2s)x_1/n"));
    let out = nlverify(&["explain", "moments.n3"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("4 pi/35"));
}

#[test]
fn csv_report_and_point_cloud() {
    let out = nlverify(&["run", "counterexamples", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check_id,computed,reference,abs_err,rel_err,tol,mode,pass\n"));
    assert!(!text.contains('\r'));

    let dir = std::env::temp_dir().join(format!("nlverify-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("harnack.csv");
    let p = path.to_str().unwrap();
    assert_eq!(nlverify(&["emit-csv", "harnack", "--out", p]).status.code(), Some(0));
    let first = std::fs::read(&path).unwrap();
    assert_eq!(first.iter().filter(|&&b| b == b'\n').count(), 1 + 4 * 601);
    assert_eq!(nlverify(&["emit-csv", "harnack", "--out", p]).status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), first);
    std::fs::remove_dir_all(&dir).ok();
}
