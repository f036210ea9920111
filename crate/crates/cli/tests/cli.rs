#![allow(clippy::excessive_precision)]

use std::path::PathBuf;
use std::process::{Command, Output};

use netvar_cli::report::Report;
use serde_json::Value;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn netvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netvar"))
        .args(args)
        .env_remove("NETVAR_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, bool) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = netvar(&full);
    let text = String::from_utf8(out.stdout).unwrap();
    let value: Value = serde_json::from_str(&text)
        .unwrap_or_else(|e| panic!("{e}: {text}\n{}", String::from_utf8_lossy(&out.stderr)));
    (value, out.status.success())
}

fn stat(report: &Value, kind: &str) -> (f64, f64) {
    let s = report["statistics"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["kind"] == kind)
        .unwrap();
    (s["raw"].as_f64().unwrap(), s["normalized"].as_f64().unwrap())
}

fn test_entry<'a>(report: &'a Value, method: &str) -> &'a Value {
    report["tests"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["method"] == method)
        .unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    ((a - b) / b).abs() <= rel
}

#[test]
fn stats_first_example_row() {
    let (r, ok) = json(&["stats", "--cov", &data("sigma1.csv")]);
    assert!(ok);
    let want = [("total", 0.48, 0.96), ("generalized", 0.056, 0.896), ("frobenius", 0.1384, 0.9642)];
    for (kind, raw, norm) in want {
        let (got_raw, got_norm) = stat(&r, kind);
        assert!((got_raw - raw).abs() < 1e-4, "{kind} raw {got_raw}");
        assert!((got_norm - norm).abs() < 1e-4, "{kind} normalized {got_norm}");
    }
    assert_eq!(r["frobenius_bounds"]["min"], 0.125);
    assert_eq!(r["frobenius_bounds"]["max"], 0.5);
}

#[test]
fn stats_second_example_row() {
    let (r, _) = json(&["stats", "--cov", &data("sigma2.csv")]);
    let (t, nt) = stat(&r, "total");
    let (g, ng) = stat(&r, "generalized");
    let (n, nn) = stat(&r, "frobenius");
    assert!((t - 0.3072).abs() < 1e-12 && (nt - 0.6144).abs() < 1e-12);
    assert!((g - 0.02016).abs() < 1e-12 && (ng - 0.32256).abs() < 1e-12);
    // VAR_N = tr² - 2 det - tr + 1/2 exactly; the published 0.6752 is
    // derived from the rounded 0.2468
    assert!((n - 0.24685184).abs() < 1e-12);
    assert!((nn - (8.0 - 16.0 * 0.24685184) / 6.0).abs() < 1e-12);
}

#[test]
fn stats_zero_matrix_has_no_variability() {
    let (r, ok) = json(&["stats", "--cov", &data("zero.csv")]);
    assert!(ok);
    for kind in ["total", "generalized", "frobenius"] {
        assert_eq!(stat(&r, kind).1, 0.0);
    }
    assert!(r["warnings"][0].as_str().unwrap().contains("rank deficient"));
}

#[test]
fn test_first_column() {
    let (r, ok) = json(&["test", "--cov", &data("sigma1.csv"), "--m", "10"]);
    assert!(ok);
    let want = [
        ("tt", 4.911379398536411e-01, 9.060410669349227e-01),
        ("tg2", 6.039441571457749e-01, 9.052187810559255e-01),
        ("tn", 9.652055302766639e-01, 9.645473108473261e-01),
    ];
    for (method, raw, adj) in want {
        let t = &test_entry(&r, method)["result"];
        assert!(close(t["p_raw"].as_f64().unwrap(), raw, 1e-9), "{method}");
        assert!(close(t["p_adjusted"].as_f64().unwrap(), adj, 1e-9), "{method}");
    }
    assert_eq!(r["tests"].as_array().unwrap().len(), 4);
}

#[test]
fn adjusted_flag_selects_the_headline_value() {
    let args = ["test", "--cov", &data("sigma2.csv"), "--m", "100", "--methods", "tn"];
    let (raw, _) = json(&args);
    let (adj, _) = json(&[&args[..], &["--adjusted"]].concat());
    let raw_entry = test_entry(&raw, "tn");
    let adj_entry = test_entry(&adj, "tn");
    assert_eq!(raw_entry["p_value"], raw_entry["result"]["p_raw"]);
    assert_eq!(adj_entry["p_value"], adj_entry["result"]["p_adjusted"]);
    assert!(close(adj_entry["p_value"].as_f64().unwrap(), 1.428399119982130e-04, 1e-9));
}

#[test]
fn quarter_identity_is_not_rejected() {
    let (r, _) = json(&["test", "--cov", &data("quarter.csv"), "--m", "50", "--methods", "tn"]);
    assert_eq!(test_entry(&r, "tn")["result"]["p_raw"], 1.0);
}

#[test]
fn gamma_shape_error_is_reported_per_method() {
    let (r, ok) = json(&["test", "--cov", &data("sigma1.csv"), "--m", "1"]);
    assert!(!ok);
    let tg2 = test_entry(&r, "tg2");
    assert!(tg2["result"].is_null());
    assert!(tg2["error"].as_str().unwrap().contains("m + 1 must exceed k"));
    for method in ["tt", "tg1", "tn"] {
        assert!(test_entry(&r, method)["result"].is_object(), "{method}");
    }
    assert_eq!(r["errors"].as_array().unwrap().len(), 1);
}

#[test]
fn test_needs_sample_size_for_covariance_input() {
    let out = netvar(&["test", "--cov", &data("sigma1.csv")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--m is required"));
}

#[test]
fn mc_matches_reference_where_ties_cannot_occur() {
    let (r, ok) = json(&[
        "mc", "--cov", &data("sigma2.csv"), "--m", "50", "--mc-stat", "varn", "--replicates", "100000", "--seed", "11",
    ]);
    assert!(ok);
    let e = &r["mc"][0];
    let p = e["p_value"].as_f64().unwrap();
    let se = (0.001018f64 * (1.0 - 0.001018) / 1e5).sqrt();
    assert!((p - 0.001018).abs() <= 3.0 * se, "{p}");
    assert_eq!(e["seed"], 11);
    assert_eq!(e["replicates"], 100000);
}

#[test]
fn mc_counts_ties_as_exceedances() {
    // The exact null tail P(T* >= T) for Σ1, total, m = 20 is 0.514819.
    let (r, _) = json(&[
        "mc", "--cov", &data("sigma1.csv"), "--m", "20", "--mc-stat", "vart", "--replicates", "100000", "--seed", "4",
    ]);
    let e = &r["mc"][0];
    let p = e["p_value"].as_f64().unwrap();
    let se = e["stderr"].as_f64().unwrap();
    assert!((p - 0.514819).abs() <= 4.0 * se, "{p} ± {se}");
}

#[test]
fn mc_is_reproducible() {
    let args = ["mc", "--cov", &data("sigma3.csv"), "--m", "10", "--replicates", "5000", "--seed", "9", "--format", "json"];
    let a = netvar(&args);
    let b = netvar(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let threaded = Command::new(env!("CARGO_BIN_EXE_netvar"))
        .args(args)
        .env("NETVAR_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.stdout, threaded.stdout);
}

#[test]
fn mc_rejects_bad_settings() {
    let zero = netvar(&["mc", "--cov", &data("sigma1.csv"), "--m", "10", "--replicates", "0"]);
    assert!(!zero.status.success());
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_netvar"))
        .args(["mc", "--cov", &data("sigma1.csv"), "--m", "10", "--replicates", "10"])
        .env("NETVAR_THREADS", "none")
        .output()
        .unwrap();
    assert!(!bad_threads.status.success());
    assert!(String::from_utf8_lossy(&bad_threads.stderr).contains("NETVAR_THREADS"));
}

#[test]
fn mc_flags_values_below_resolution() {
    let (r, ok) = json(&["mc", "--cov", &data("zero.csv"), "--m", "200", "--mc-stat", "vart", "--replicates", "200"]);
    assert!(ok);
    assert_eq!(r["mc"][0]["below_resolution"], true);
    assert!(r["warnings"][0].as_str().unwrap().contains("p < 1/200"));
}

#[test]
fn moments_of_every_structure() {
    let (r, ok) = json(&["moments", "--samples", &data("maxent.txt")]);
    assert!(ok);
    let m = &r["moments"];
    for i in 0..3 {
        assert_eq!(m["p_hat"][i], 0.5);
        for j in 0..3 {
            assert_eq!(m["sigma"][i][j], if i == j { 0.25 } else { 0.0 });
            assert_eq!(m["p_joint"][i][j], if i == j { 0.5 } else { 0.25 });
        }
    }
    assert_eq!(m["diagnostic"]["valid"], true);
}

#[test]
fn moments_of_identical_rows() {
    let (r, _) = json(&["moments", "--samples", &data("identical.txt")]);
    for row in r["moments"]["sigma"].as_array().unwrap() {
        assert!(row.as_array().unwrap().iter().all(|x| x == 0.0));
    }
    assert_eq!(r["entropy"]["entropy"], "minimum");
}

#[test]
fn moments_three_rows() {
    let (r, _) = json(&["moments", "--samples", &data("three.txt")]);
    let s = r["moments"]["sigma"][0][1].as_f64().unwrap();
    assert!((s - 1.0 / 9.0).abs() < 1e-15);
    assert_eq!(r["moments"]["edges"][0], serde_json::json!(["A", "B"]));
    assert_eq!(r["input"]["nodes"], serde_json::json!(["A", "B", "C"]));
}

#[test]
fn stats_agree_between_samples_and_exported_covariance() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sigma.csv");
    let csv = csv.to_str().unwrap();
    let samples = data("arcs.txt");
    let out = netvar(&["moments", "--samples", &samples, "--directed", "--cov-out", csv]);
    assert!(out.status.success());
    let (from_samples, _) = json(&["stats", "--samples", &samples, "--directed"]);
    let (from_cov, _) = json(&["stats", "--cov", csv, "--m", "4"]);
    for field in ["statistics", "frobenius_bounds", "warnings", "errors"] {
        assert_eq!(from_samples[field], from_cov[field], "{field}");
    }
    assert_eq!(from_samples["input"]["m"], from_cov["input"]["m"]);
    assert_eq!(from_samples["input"]["k"], from_cov["input"]["k"]);
}

#[test]
fn directed_input_matches_its_skeleton() {
    let (directed, _) = json(&["moments", "--samples", &data("arcs.txt"), "--directed"]);
    let (undirected, _) = json(&["moments", "--samples", &data("arcs.txt")]);
    assert_eq!(directed["moments"], undirected["moments"]);
    assert_eq!(directed["input"]["directed"], true);
}

#[test]
fn classify_tags() {
    let (r, ok) = json(&["classify", "--samples", &data("identical.txt")]);
    assert!(ok);
    assert_eq!(r["entropy"]["entropy"], "minimum");
    assert_eq!(r["entropy"]["structures"][0]["count"], 3);

    let (r, _) = json(&["classify", "--samples", &data("maxent.txt")]);
    assert_eq!(r["entropy"]["entropy"], "intermediate");
    let structures = r["entropy"]["structures"].as_array().unwrap();
    assert_eq!(structures.len(), 8);
    assert!(structures.iter().all(|s| s["frequency"] == 0.125));
    for s in r["statistics"].as_array().unwrap() {
        assert!(s["complemented"].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn classify_rejects_covariance_input() {
    let out = netvar(&["classify", "--cov", &data("sigma1.csv")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--samples"));
}

#[test]
fn invalid_covariance_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "0.3,0\n0,0.2\n").unwrap();
    let path = path.to_str().unwrap();
    let (r, ok) = json(&["stats", "--cov", path]);
    assert!(!ok);
    assert!(r["statistics"].as_array().unwrap().is_empty());
    assert!(r["errors"][0].as_str().unwrap().contains("DiagonalRange"));
    let (r, _) = json(&["stats", "--cov", path, "--force"]);
    assert!(r["warnings"][0].as_str().unwrap().contains("DiagonalRange"));
}

#[test]
fn parse_errors_carry_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.txt");
    std::fs::write(&path, "nodes A B\ngraph\nA Q\n").unwrap();
    let out = netvar(&["stats", "--samples", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.txt:3:") && err.contains("`Q`"), "{err}");
}

#[test]
fn table_view_prints_seven_digits() {
    let out = netvar(&["test", "--cov", &data("sigma1.csv"), "--m", "10"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.4911379") && text.contains("0.9060411"), "{text}");
}

#[test]
fn unbiased_estimator_is_recorded() {
    let (r, _) = json(&["moments", "--samples", &data("three.txt"), "--estimator", "unbiased"]);
    assert_eq!(r["input"]["estimator"], "unbiased");
    let s = r["moments"]["sigma"][0][1].as_f64().unwrap();
    assert!((s - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn reports_follow_the_schema_and_round_trip() {
    let schema_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let runs: Vec<Vec<String>> = vec![
        vec!["moments".into(), "--samples".into(), data("arcs.txt"), "--directed".into()],
        vec!["stats".into(), "--cov".into(), data("zero.csv")],
        vec!["test".into(), "--cov".into(), data("sigma3.csv"), "--m".into(), "1".into()],
        vec!["mc".into(), "--cov".into(), data("sigma1.csv"), "--m".into(), "10".into(), "--replicates".into(), "500".into()],
        vec!["classify".into(), "--samples".into(), data("maxent.txt")],
    ];
    for args in runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (value, _) = json(&args);
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{}: {errors:?}", args[0]);
        let report: Report = serde_json::from_value(value.clone()).unwrap();
        assert_eq!(serde_json::to_value(&report).unwrap(), value);
    }
}
