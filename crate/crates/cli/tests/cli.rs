use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn uniclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uniclass"))
        .args(args)
        .env_remove("UNICLASS_SEED")
        .output()
        .expect("binary runs")
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate_to(dir: &Path, file: &str, args: &[&str]) -> String {
    let path = dir.join(file);
    let mut all = vec!["generate"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", path_str(&path)]);
    let out = uniclass(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path_str(&path).to_string()
}

#[test]
fn generate_product_writes_requested_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate_to(dir.path(), "u.json", &["product", "--n", "2", "--k", "3", "--seed", "7"]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((v["n"].as_u64(), v["k"].as_u64()), (Some(2), Some(3)));
    assert_eq!(v["re"].as_array().unwrap().len(), 36);
}

#[test]
fn generate_is_deterministic_and_honours_env_seed() {
    let a = uniclass(&["generate", "haar", "--n", "2", "--k", "2", "--seed", "11"]);
    let b = Command::new(env!("CARGO_BIN_EXE_uniclass"))
        .args(["generate", "haar", "--n", "2", "--k", "2"])
        .env("UNICLASS_SEED", "11")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = uniclass(&["generate", "haar", "--n", "2", "--k", "2", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generate_counterexample_fixture() {
    let out = uniclass(&["generate", "counterexample", "--name", "no_block_svd_4x4"]);
    assert!(out.status.success());
    let v = json_out(&out);
    let re: Vec<f64> = v["re"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let expected = [1., 0., 0., 1., 0., 2., 1., 0., 0., 1., 1., 0., 1., 0., 0., 1.];
    assert_eq!(re, expected);
    assert!(v["im"].as_array().unwrap().iter().all(|x| x.as_f64() == Some(0.0)));
}

#[test]
fn generate_const_infers_environment_dimension() {
    let out = uniclass(&["generate", "const", "--n", "2", "--r", "2", "--seed", "1"]);
    assert!(out.status.success());
    let v = json_out(&out);
    assert_eq!((v["n"].as_u64(), v["k"].as_u64()), (Some(2), Some(4)));
}

#[test]
fn generate_usage_errors_exit_2() {
    assert_eq!(uniclass(&["generate", "nope", "--n", "2", "--k", "2"]).status.code(), Some(2));
    assert_eq!(uniclass(&["generate", "product", "--n", "2"]).status.code(), Some(2));
    assert_eq!(uniclass(&["generate", "const", "--n", "2", "--k", "3"]).status.code(), Some(2));
    assert_eq!(uniclass(&["generate", "block_diag_A", "--n", "2", "--k", "2", "--p", "5"]).status.code(), Some(2));
    assert_eq!(uniclass(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn classify_product_and_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_to(dir.path(), "p.json", &["product", "--n", "2", "--k", "2", "--seed", "3"]);
    let out = uniclass(&["classify", &p]);
    assert!(out.status.success());
    let r = json_out(&out);
    assert_eq!(r["verdicts"]["aut"]["value"], "yes");
    assert_eq!(r["verdicts"]["aut"]["witness"]["kind"], "product");

    let m = generate_to(dir.path(), "m.json", &["counterexample", "--name", "mixed_4x2"]);
    let r = json_out(&uniclass(&["classify", &m]));
    assert_eq!(r["verdicts"]["mixed_necessary"]["value"], "no");
    assert_eq!(r["verdicts"]["mixed_necessary"]["heuristic"], false);
    assert_eq!(r["verdicts"]["block_diag_B"]["value"], "yes");
}

#[test]
fn classify_haar_gives_commutator_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let h = generate_to(dir.path(), "h.json", &["haar", "--n", "2", "--k", "3", "--seed", "4"]);
    let r = json_out(&uniclass(&["classify", &h]));
    for side in ["block_diag_A", "block_diag_B"] {
        assert_eq!(r["verdicts"][side]["value"], "no");
        assert_eq!(r["verdicts"][side]["witness"]["kind"], "commutator");
        assert!(r["verdicts"][side]["witness"]["norm"].as_f64().unwrap() > 1e-6);
    }
}

#[test]
fn classify_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let x = generate_to(dir.path(), "x.json", &["counterexample", "--name", "no_block_svd_4x4"]);
    assert_eq!(uniclass(&["classify", &x]).status.code(), Some(3));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 2").unwrap();
    assert_eq!(uniclass(&["classify", path_str(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(uniclass(&["classify", path_str(&missing)]).status.code(), Some(2));
}

#[test]
fn classify_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let u = generate_to(dir.path(), "u.json", &["block_diag_A", "--n", "2", "--k", "2", "--seed", "9"]);
    let out = uniclass(&["classify", &u]);
    let report: uniclass_core::ClassReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.value("block_diag_A"), uniclass_core::Answer::Yes);
    let again = uniclass(&["classify", &u]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn blocksvd_fixture_without_decomposition_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let x = generate_to(dir.path(), "x.json", &["counterexample", "--name", "no_block_svd_4x4"]);
    let out = uniclass(&["blocksvd", &x]);
    assert_eq!(out.status.code(), Some(4));
    let w = json_out(&out);
    assert_eq!(w["holds"], false);
    // X11 X22* against X12 X22*, flat indices (0, 3) and (1, 3)
    let named = w["violations"].as_array().unwrap().iter().any(|v| {
        v["family"] == "X_a X_b*" && v["first"] == serde_json::json!([0, 3]) && v["second"] == serde_json::json!([1, 3])
    });
    assert!(named, "{w}");
}

#[test]
fn blocksvd_positive_cases() {
    let dir = tempfile::tempdir().unwrap();
    let b = generate_to(dir.path(), "b.json", &["block_diag_A", "--n", "2", "--k", "3", "--p", "2", "--seed", "5"]);
    let out = uniclass(&["blocksvd", &b]);
    assert!(out.status.success());
    assert_eq!(json_out(&out)["terms"].as_array().unwrap().len(), 2);

    let p = generate_to(dir.path(), "p.json", &["product", "--n", "2", "--k", "3", "--seed", "5"]);
    assert_eq!(json_out(&uniclass(&["blocksvd", &p]))["terms"].as_array().unwrap().len(), 1);

    let c = generate_to(dir.path(), "c.json", &["circulant", "--n", "2", "--k", "2", "--seed", "5"]);
    assert!(uniclass(&["blocksvd", &c, "--side", "B"]).status.success());
}

#[test]
fn dimension_modes() {
    let f = json_out(&uniclass(&["dimension", "formulas", "--n", "2", "--k", "3"]));
    assert_eq!(f["formulas"]["dim_U_block_diag_A"]["value"], 24);
    assert_eq!(f["formulas"]["conjectured_dim_U_unital"]["conjecture"], true);

    let m = json_out(&uniclass(&["dimension", "mblockdiag", "--n", "2", "--k", "2"]));
    assert_eq!((m["analytic"].as_u64(), m["numeric"].as_u64()), (Some(20), Some(20)));

    let dir = tempfile::tempdir().unwrap();
    let p = generate_to(dir.path(), "p.json", &["product", "--n", "2", "--k", "2", "--seed", "1"]);
    let e = json_out(&uniclass(&["dimension", "enveloping", &p]));
    assert_eq!((e["analytic"].as_u64(), e["numeric"].as_u64()), (Some(16), Some(16)));
    assert_eq!(e["agree"], true);

    let h = generate_to(dir.path(), "h.json", &["haar", "--n", "2", "--k", "2", "--seed", "1"]);
    assert_eq!(uniclass(&["dimension", "enveloping", &h]).status.code(), Some(3));
}

#[test]
fn study_writes_csv_and_reports_obstruction() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"shapes": [[2, 2], [2, 3], [3, 2]],
            "generators": ["block_diag_A", "product", "const"],
            "samples_per_cell": 5, "seed": 1}"#,
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let out = uniclass(&["study", path_str(&spec), "--csv", path_str(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json_out(&out);
    assert_eq!(s["inclusion_violations"], 0);
    assert_eq!(s["inconsistencies"], 0);
    let obstructed: Vec<&Value> =
        s["rows"].as_array().unwrap().iter().filter(|r| r["status"] == "dimension_obstruction").collect();
    // const exists only when n divides k
    assert_eq!(obstructed.len(), 2);
    assert!(obstructed.iter().all(|r| r["generator"] == "const"));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 1 + 9);
    assert!(table.contains("2,3,const,,dimension_obstruction,0"));
}

#[test]
fn study_spec_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"shapes": [], "generators": ["haar"], "samples_per_cell": 1}"#).unwrap();
    assert_eq!(uniclass(&["study", path_str(&spec)]).status.code(), Some(2));
    std::fs::write(&spec, r#"{"shapes": [[2, 2]], "generators": ["haar"]}"#).unwrap();
    assert_eq!(uniclass(&["study", path_str(&spec)]).status.code(), Some(2));
}

#[test]
fn tolerance_flags_are_global() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_to(dir.path(), "p.json", &["product", "--n", "2", "--k", "2", "--seed", "2"]);
    let out = uniclass(&["--eq-tol", "1e-8", "classify", &p, "--budget", "1", "--spec-tol", "1e-6"]);
    assert!(out.status.success());
    assert_eq!(uniclass(&["--eq-tol", "-1", "classify", &p]).status.code(), Some(2));
}
