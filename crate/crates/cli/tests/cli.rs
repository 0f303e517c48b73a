use std::path::Path;
use std::process::Command;

use serde_json::Value;
use ternary_stab_cli::strip_meta;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ternary-stab"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn json(r: &Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stderr))
}

fn assert_schema(name: &str, v: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(v)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "sample_index",
            "mu_re",
            "mu_im",
            "defect",
            "control_value",
            "dominated"
        ]
    );
    r.records().map(Result::unwrap).collect()
}

#[test]
fn verify_ring_reports_exact_axioms() {
    let r = run(&[
        "verify-ring",
        "--rows",
        "3",
        "--cols",
        "2",
        "--samples",
        "200",
        "--seed",
        "7",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_schema("verify_ring", &v);
    for k in [
        "max_assoc_residual",
        "max_norm_ineq_violation",
        "max_cube_identity_residual",
    ] {
        assert!(v["report"][k].as_f64().unwrap() < 1e-10, "{k}");
    }
}

#[test]
fn invalid_input_exits_2_with_a_diagnostic() {
    let r = run(&["verify-ring", "--rows", "0", "--seed", "7"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("shape must be positive"), "{}", r.stderr);
    assert!(r.stdout.is_empty());

    let r = run(&["verify-ring"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("seed"));

    let r = run(&["defect", "--scenario", "wobbly", "--seed", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("unsupported scenario kind"));

    let r = run(&["report", "--seed", "1", "--d", "3", "--l", "3"]);
    assert_eq!(r.code, 2);

    let r = run(&[
        "defect",
        "--scenario",
        "exact",
        "--seed",
        "1",
        "--control",
        "constant:oops",
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn same_config_gives_identical_payloads() {
    let args = [
        "verify-ring",
        "--rows",
        "2",
        "--cols",
        "3",
        "--samples",
        "50",
        "--seed",
        "9",
    ];
    let a = strip_meta(json(&run(&args)));
    let b = strip_meta(json(&run(&args)));
    assert_eq!(a, b);
    let c = strip_meta(json(&run(&[
        "verify-ring",
        "--rows",
        "2",
        "--cols",
        "3",
        "--samples",
        "50",
        "--seed",
        "10",
    ])));
    assert_ne!(a["config_hash"], c["config_hash"]);
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"seed": 7, "rows": 0, "cols": 2, "samples": 20}"#).unwrap();
    let out = dir.path().join("out.json");
    let c = cfg.to_str().unwrap();
    assert_eq!(run(&["verify-ring", "--config", c]).code, 2);
    let r = run(&[
        "verify-ring",
        "--config",
        c,
        "--rows",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["report"]["shape"]["rows"], 3);
    assert_eq!(v["config"]["samples"], 20);
    assert!(v["config"].get("out").is_none());

    std::fs::write(&cfg, r#"{"seed": 7, "unknown_field": 1}"#).unwrap();
    assert_eq!(run(&["verify-ring", "--config", c]).code, 2);
}

#[test]
fn defect_tables() {
    let r = run(&["defect", "--scenario", "exact", "--seed", "3", "--samples", "40"]);
    assert_eq!(r.code, 0);
    for row in csv_rows(&r.stdout) {
        assert!(row[3].parse::<f64>().unwrap() <= 1e-9);
        assert_eq!(&row[5], "true");
    }

    let r = run(&[
        "defect",
        "--scenario",
        "truncated",
        "--seed",
        "3",
        "--samples",
        "40",
    ]);
    assert_eq!(r.code, 0);
    let rows = csv_rows(&r.stdout);
    assert_eq!(rows.len(), 40);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), k);
        assert_eq!(row[4].parse::<f64>().unwrap(), 13.0);
        // 17 significant digits in every float column
        for col in 1..5 {
            let mantissa = row[col].split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    let r = run(&[
        "defect",
        "--scenario",
        "constant_noise",
        "--seed",
        "3",
        "--samples",
        "100",
        "--control",
        "constant:0.001",
    ]);
    assert_eq!(r.code, 1);
    assert!(csv_rows(&r.stdout).iter().any(|row| &row[5] == "false"));
}

#[test]
fn extract_outputs() {
    let r = run(&["extract", "--scenario", "truncated", "--seed", "5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_schema("extract", &v);
    for e in v["extracted"]["matrix"].as_array().unwrap() {
        assert!(e[0].as_f64().unwrap().abs() <= 1e-12 && e[1].as_f64().unwrap().abs() <= 1e-12);
    }

    let r = run(&["extract", "--scenario", "exact", "--seed", "5", "--rows", "3"]);
    assert_eq!(r.code, 0);
    let v = json(&r);
    assert!(v["expected_distance"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["extracted"]["provenance"]["scenario"], v["scenario"]["id"]);

    let r = run(&[
        "extract",
        "--scenario",
        "constant_noise",
        "--seed",
        "5",
        "--n-max",
        "2",
    ]);
    assert_eq!(r.code, 3);
    let v = json(&r);
    assert_schema("extract", &v);
    assert_eq!(v["converged"], false);
    assert!(v["extracted"].is_null());
}

#[test]
fn report_pipeline_and_exit_codes() {
    let r = run(&["report", "--seed", "42"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_schema("report", &v);
    let ids: Vec<&str> = v["scenarios"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["id"].as_str().unwrap())
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(ids.len(), 6);
    let smooth = v["scenarios"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["descriptor"]["kind"]["kind"] == "smooth_noise")
        .unwrap();
    assert_eq!(smooth["discrepancy"]["mandatory"], "without_prefactor");
    let names: Vec<&str> = smooth["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"stability_bound") && names.contains(&"stability_bound_with_prefactor"));

    let r = run(&[
        "report",
        "--seed",
        "42",
        "--scenario",
        "constant_noise",
        "--control",
        "constant:0.001",
    ]);
    assert_eq!(r.code, 1);
    assert_eq!(json(&r)["passed"], false);

    let r = run(&[
        "report",
        "--seed",
        "42",
        "--scenario",
        "constant_noise",
        "--n-max",
        "2",
    ]);
    assert_eq!(r.code, 3);
    assert!(json(&r)["scenarios"][0]["error"].is_string());
}

#[test]
fn bound_only_report_gives_closed_forms() {
    let r = run(&[
        "report",
        "--seed",
        "42",
        "--bound-only",
        "--scenario",
        "truncated",
    ]);
    assert_eq!(r.code, 0);
    let v = json(&r);
    assert_schema("report", &v);
    let b = &v["scenarios"][0]["bounds"];
    assert!((b["with_prefactor"].as_f64().unwrap() - 13.0 / 3.0).abs() <= 1e-12);
    assert!((b["phi_tilde"]["closed_form_value"].as_f64().unwrap() - 52.0 / 3.0).abs() <= 1e-12);
    assert!(v["scenarios"][0]["checks"].as_array().unwrap().is_empty());
}

fn table(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("norm"))
        .map(|l| {
            l.split_whitespace()
                .map(|c| c.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

#[test]
fn bound_table() {
    let r = run(&["bound", "--eps", "1", "--p", "0", "--norms", "1"]);
    assert_eq!(r.code, 0);
    let t = table(&r.stdout);
    assert!((t[0][5] - 1.0).abs() <= 1e-12 && (t[0][4] - 1.0).abs() <= 1e-12);

    let t = table(&run(&["bound", "--delta", "13"]).stdout);
    assert!(t.iter().all(|row| (row[5] - 13.0 / 3.0).abs() <= 1e-12));

    let t = table(&run(&["bound", "--eps", "0", "--p", "0.5"]).stdout);
    assert!(t.iter().all(|row| row[4] == 0.0 && row[5] == 0.0));

    let r = run(&["bound", "--eps", "1", "--p", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("p ∈ [0,1)"));
    assert!(r.stdout.is_empty());
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let args = ["report", "--seed", "42", "--scenario", "exact", "--samples", "50"];
    let one = run_env(&args, &[("TERNARY_STAB_THREADS", "1")]);
    assert_eq!(one.code, 0);
    let many = run_env(&args, &[("TERNARY_STAB_THREADS", "4")]);
    assert_eq!(strip_meta(json(&one)), strip_meta(json(&many)));
    assert_eq!(run_env(&args, &[("TERNARY_STAB_THREADS", "0")]).code, 2);
}
