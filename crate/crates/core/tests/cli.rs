//! Command-line behaviour and the exit-code contract.

use std::path::Path;

use sdspace::cli::{run, EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK, EXIT_UNCONVERGED, OUT_ENV};
use serde_json::Value;

fn sdspace(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sdspace").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "[truncation]\nk_max = 4\nm_max = 40\n";

// Unreachable tolerance with a tiny panel budget: every integral stops early.
const STARVED: &str = "[truncation]\nk_max = 2\nm_max = 6\n[quadrature]\nabs_tol = 1e-300\nmax_panels_per_axis = 4\n";

#[test]
fn catalog_lists_families_and_is_stable() {
    let (code, first, _) = sdspace(&["catalog"]);
    assert_eq!(code, EXIT_OK);
    assert!(first.contains("oscillating-pack"));
    assert!(first.contains("sinc"));
    let (_, second, _) = sdspace(&["catalog"]);
    assert_eq!(first, second);
}

#[test]
fn norm_of_zero_is_zero() {
    let (code, out, _) = sdspace(&["norm", "zero", "--p", "2"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"].as_f64(), Some(0.0));
    assert_eq!(v["converged"].as_bool(), Some(true));
}

#[test]
fn sup_norm_reports_tail_and_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let (code, out, _) = sdspace(&["--config", &cfg, "norm", "gaussian", "--p", "inf"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["p"].as_str(), Some("inf"));
    assert_eq!(v["lower_bound"].as_bool(), Some(true));
    assert!(v["tail_bound"].as_f64().unwrap() > 0.0);
    let max_term = v["contributions"].as_array().unwrap().iter().map(|c| c["term"].as_f64().unwrap()).fold(0.0, f64::max);
    assert_eq!(v["value"].as_f64().unwrap(), max_term);
}

#[test]
fn norm_writes_contributions_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let out_dir = dir.path().join("out");
    let (code, _, _) = sdspace(&["--config", &cfg, "--out", out_dir.to_str().unwrap(), "norm", "bump", "--contributions"]);
    assert_eq!(code, EXIT_OK);
    let csv = std::fs::read_to_string(out_dir.join("contributions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn missing_grid_file_exits_with_config_code() {
    let (code, _, err) = sdspace(&["norm", "grid:/definitely/not/here.csv"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("not/here.csv"));
}

#[test]
fn unknown_field_and_bad_exponent_are_config_errors() {
    assert_eq!(sdspace(&["norm", "no-such-family"]).0, EXIT_CONFIG);
    assert_eq!(sdspace(&["norm", "zero", "--p", "0.5"]).0, EXIT_CONFIG);
}

#[test]
fn grid_field_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("n,components,spacing,origin\n1,1,0.5,-2\n");
    for j in 0..9 {
        let x = -2.0 + 0.5 * j as f64;
        body.push_str(&format!("{},0\n", (-x * x).exp()));
    }
    let grid = write_config(dir.path(), "g.csv", &body);
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let (code, out, err) = sdspace(&["--config", &cfg, "norm", &format!("grid:{grid}")]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_config_key_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[truncation]\nk_max = 4\nkmax = 5\n");
    let (code, out, err) = sdspace(&["--config", &cfg, "catalog"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(out.is_empty());
    assert!(err.contains("kmax"));
}

#[test]
fn invalid_config_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (i, body) in ["dimension = 0\n", "[truncation]\nbox_radius = -1.0\n", "[quadrature]\nabs_tol = 0.0\n", "[flow]\nlambdas = []\n"].iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("c{i}.toml"), body);
        assert_eq!(sdspace(&["--config", &cfg, "catalog"]).0, EXIT_CONFIG, "{body}");
    }
    assert_eq!(sdspace(&["--config", "/no/such/config.toml", "catalog"]).0, EXIT_CONFIG);
}

#[test]
fn unknown_suite_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = sdspace(&["--out", dir.path().to_str().unwrap(), "verify", "--suite", "nope"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("nope"));
}

#[test]
fn unparseable_arguments_exit_with_config_code() {
    assert_eq!(sdspace(&["frobnicate"]).0, EXIT_CONFIG);
    assert_eq!(sdspace(&["norm"]).0, EXIT_CONFIG);
}

#[test]
fn unconverged_norm_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", STARVED);
    let (code, out, _) = sdspace(&["--config", &cfg, "norm", "gaussian"]);
    assert_eq!(code, EXIT_UNCONVERGED);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["converged"].as_bool(), Some(false));
}

#[test]
fn unconverged_verify_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{STARVED}[compactness]\nm_values = [1.0, 2.0]\n[tolerances]\ncompactness_decay = 10.0\ncompactness_l2 = 10.0\n");
    let cfg = write_config(dir.path(), "c.toml", &body);
    let (code, out, _) = sdspace(&["--config", &cfg, "--out", dir.path().to_str().unwrap(), "verify", "--suite", "compactness"]);
    assert_eq!(code, EXIT_UNCONVERGED, "{out}");
}

#[test]
fn failed_assertion_exits_with_code_three_and_outranks_unconverged() {
    let dir = tempfile::tempdir().unwrap();
    let failing = "[compactness]\nm_values = [1.0, 2.0]\n[tolerances]\ncompactness_decay = 1e-9\n";
    let cfg = write_config(dir.path(), "fail.toml", &format!("{SMALL}{failing}"));
    let out = dir.path().join("a");
    let (code, _, _) = sdspace(&["--config", &cfg, "--out", out.to_str().unwrap(), "verify", "--suite", "compactness"]);
    assert_eq!(code, EXIT_ASSERTION);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary[0]["converged"].as_bool(), Some(true));

    let cfg = write_config(dir.path(), "both.toml", &format!("{STARVED}{failing}"));
    let out = dir.path().join("b");
    let (code, _, _) = sdspace(&["--config", &cfg, "--out", out.to_str().unwrap(), "verify", "--suite", "compactness"]);
    assert_eq!(code, EXIT_ASSERTION);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary[0]["converged"].as_bool(), Some(false));
}

#[test]
fn verify_writes_reports_summary_and_separate_run_meta() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = sdspace(&["--out", dir.path().to_str().unwrap(), "verify", "--suite", "indexing"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("indexing"));
    for file in ["indexing.json", "indexing.csv", "summary.json", "run_meta.json"] {
        assert!(dir.path().join(file).exists(), "{file}");
    }
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("indexing.json")).unwrap()).unwrap();
    assert_eq!(report["suite"].as_str(), Some("indexing"));
    assert!(report["cases"].as_array().is_some_and(|c| !c.is_empty()));
    assert!(report.get("notes").is_some());
    let text = std::fs::read_to_string(dir.path().join("indexing.json")).unwrap();
    assert!(!text.contains("unix") && !text.contains("elapsed"));
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let from_config = dir.path().join("cfg");
    let from_env = dir.path().join("env");
    let from_flag = dir.path().join("flag");
    let cfg = write_config(dir.path(), "c.toml", &format!("output_dir = {:?}\nsuites = [\"indexing\"]\n", from_config.to_str().unwrap()));
    assert_eq!(sdspace(&["--config", &cfg, "verify"]).0, EXIT_OK);
    assert!(from_config.join("indexing.json").exists());

    std::env::set_var(OUT_ENV, &from_env);
    assert_eq!(sdspace(&["--config", &cfg, "verify"]).0, EXIT_OK);
    assert_eq!(sdspace(&["--config", &cfg, "--out", from_flag.to_str().unwrap(), "verify"]).0, EXIT_OK);
    std::env::remove_var(OUT_ENV);
    assert!(from_env.join("indexing.json").exists());
    assert!(from_flag.join("indexing.json").exists());
}

#[test]
fn inner_product_of_a_field_with_itself_is_its_squared_norm() {
    let (code, out, _) = sdspace(&["inner", "bump", "bump"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["im"].as_f64(), Some(0.0));
    let norm = v["norm_a"].as_f64().unwrap();
    approx::assert_relative_eq!(v["re"].as_f64().unwrap(), norm * norm, max_relative = 1e-12);
    assert_eq!(v["holder_bound_holds"].as_bool(), Some(true));
}

#[test]
fn inner_product_is_conjugate_symmetric_and_matches_fixture() {
    let (code_ab, ab, _) = sdspace(&["inner", "bump", "gaussian"]);
    let (code_ba, ba, _) = sdspace(&["inner", "gaussian", "bump"]);
    assert_eq!((code_ab, code_ba), (EXIT_OK, EXIT_OK));
    let ab: Value = serde_json::from_str(&ab).unwrap();
    let ba: Value = serde_json::from_str(&ba).unwrap();
    assert_eq!(ab["re"], ba["re"]);
    assert_eq!(ab["im"].as_f64().unwrap(), -ba["im"].as_f64().unwrap());
    assert_eq!(ab["holder_bound_holds"].as_bool(), Some(true));
    // Snapshot of the default configuration's first run.
    approx::assert_relative_eq!(ab["re"].as_f64().unwrap(), 3.634048461400548, max_relative = 1e-10);
    approx::assert_relative_eq!(ab["im"].as_f64().unwrap(), 1.7398072001310857e-5, max_relative = 1e-6);
}
