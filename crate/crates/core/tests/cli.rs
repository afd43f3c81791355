use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gevrey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gevrey")).args(args).env_remove("GEVREY_OUTPUT_DIR").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(validator: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn lambertw_table_has_header_and_zero_row() {
    let out = gevrey(&["lambertw", "--grid", "0:700:8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,w,residual"));
    assert!(lines.next().unwrap().starts_with("0,0,"));
}

#[test]
fn assocfn_columns() {
    let out = gevrey(&["assocfn", "--tau", "1", "--sigma", "2", "--h", "1", "--grid", "1:1e10:16", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("k,T_sup,T_counting,argmax_p"));
    assert_eq!(text.lines().count(), 1 + 161);
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() <= 1e-9 * v[1].max(1.0), "{line}");
    }
}

#[test]
fn phi_table_has_e_squared_row() {
    let out = gevrey(&["phi", "--sigma", "2", "--grid", "0:100:32"]);
    assert_eq!(out.status.code(), Some(0));
    let row = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .find(|r| r[0] == std::f64::consts::E)
        .expect("row t = e");
    assert!((row[1] - std::f64::consts::E.powi(2)).abs() < 1e-13);
}

#[test]
fn table_headers() {
    for (cmd, header) in [
        ("sequence", "p,log_M"),
        ("quotients", "p,log_m,lower,upper"),
        ("conjugate", "y,t_star,phi_star"),
    ] {
        let out = gevrey(&[cmd]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        assert_eq!(stdout(&out).lines().next(), Some(header), "{cmd}");
    }
}

#[test]
fn json_table_matches_schema() {
    let out = gevrey(&["quotients", "--p-max", "20", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&schema("table.schema.json"), &doc);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 20);
}

#[test]
fn verify_report_matches_schemas() {
    let out = gevrey(&["verify", "--only", "m1,m4-tilde,ocena-norme,corollary"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&schema("verify_report.schema.json"), &doc);
    let condition = schema("condition_report.schema.json");
    for id in ["m1", "m4-tilde"] {
        for report in doc[id]["details"].as_array().unwrap() {
            assert_valid(&condition, report);
        }
    }
    let equivalence = schema("equivalence_report.schema.json");
    for id in ["ocena-norme", "corollary"] {
        assert_valid(&equivalence, &doc[id]["details"]);
    }
}

#[test]
fn verify_single_claim() {
    let out = gevrey(&["verify", "--only", "liminf", "--Q", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<&String> = doc.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["liminf"]);
    assert_eq!(doc["liminf"]["holds"], Value::Bool(true));
}

#[test]
fn classical_m2_fails_with_exit_1() {
    let out = gevrey(&["verify", "--only", "m2-classical"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed claims: m2-classical"));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let witness = doc["m2-classical"]["details"][0]["witness"].as_u64().unwrap();
    assert!(witness <= 100);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["phi", "--sigma", "1"][..],
        &["lambertw", "--grid", "10:1:8"],
        &["lambertw", "--grid", "1:10:3"],
        &["verify", "--only", "no-such-claim"],
        &["assocfn", "--h", "0"],
        &["frobnicate"],
    ] {
        assert_eq!(gevrey(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn output_goes_to_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gevrey"))
        .args(["lambertw", "--grid", "1:10:4", "--output", "w.csv"])
        .env("GEVREY_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
}

#[test]
fn linear_grid_uses_point_count() {
    let out = gevrey(&["phi", "--linear", "--grid", "0:4:5", "--sigma", "2"]);
    let ts: Vec<f64> = stdout(&out).lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ts, [0.0, 1.0, 2.0, std::f64::consts::E, 3.0, 4.0]);
}
