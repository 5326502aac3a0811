use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    root().join("fixtures").join(name)
}

fn qwhile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwhile")).args(args).current_dir(root()).output().expect("spawn qwhile")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

type Amps = BTreeMap<(String, String), (f64, f64)>;

fn amplitudes(state: &Value) -> Amps {
    state
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let key = (e["ancillas"].as_str().unwrap().to_string(), e["regs"].to_string());
            (key, (e["re"].as_f64().unwrap(), e["im"].as_f64().unwrap()))
        })
        .collect()
}

fn max_diff(a: &Amps, b: &Amps) -> f64 {
    let zero = (0.0, 0.0);
    a.keys()
        .chain(b.keys())
        .map(|k| {
            let (x, y) = (a.get(k).unwrap_or(&zero), b.get(k).unwrap_or(&zero));
            (x.0 - y.0).hypot(x.1 - y.1)
        })
        .fold(0.0, f64::max)
}

#[test]
fn fixtures_match_expected_states() {
    let dir = root().join("fixtures/expected");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let want: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let program = fixture(want["program"].as_str().unwrap());
        let n = want["n"].to_string();
        let out = qwhile(&["run", program.to_str().unwrap(), "--mode", want["mode"].as_str().unwrap(), "--n", &n]);
        assert_eq!(code(&out), 0, "{}", path.display());
        let got = json(&out);
        let d = max_diff(&amplitudes(&got["state"]), &amplitudes(&want["state"]));
        assert!(d <= 1e-9, "{}: deviation {d}", path.display());
        let dm = (got["terminated_mass"].as_f64().unwrap() - want["terminated_mass"].as_f64().unwrap()).abs();
        assert!(dm <= 1e-9, "{}: mass deviation {dm}", path.display());
        seen += 1;
    }
    assert_eq!(seen, 8);
}

#[test]
fn skip_loop_linear_is_empty() {
    let out = qwhile(&["run", fixture("skip_loop.qw").to_str().unwrap(), "--mode", "linear", "--n", "5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["state"], serde_json::json!([]));
    assert_eq!(v["terminated_mass"].as_f64(), Some(0.0));
}

#[test]
fn loop_free_program_echoes_input() {
    let out = qwhile(&["run", fixture("skip.qw").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["state"], serde_json::json!([{"ancillas": "", "regs": {"a": 1, "r": 2}, "re": 1.0, "im": 0.0}]));

    let out = qwhile(&["trace", fixture("skip.qw").to_str().unwrap()]);
    let steps = json(&out)["steps"].as_array().unwrap().clone();
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0]["state"], v["state"]);
}

#[test]
fn trace_labels_every_iteration() {
    let out = qwhile(&["trace", fixture("h_loop.qw").to_str().unwrap(), "--n", "3"]);
    assert_eq!(code(&out), 0);
    let labels: Vec<String> = json(&out)["steps"].as_array().unwrap().iter().map(|s| s["label"].as_str().unwrap().to_string()).collect();
    assert_eq!(labels, ["W_0", "W_1", "W_2", "W_3"]);

    let out = qwhile(&["trace", fixture("h_loop.qw").to_str().unwrap(), "--n", "2", "--mode", "linear"]);
    let labels: Vec<String> = json(&out)["steps"].as_array().unwrap().iter().map(|s| s["label"].as_str().unwrap().to_string()).collect();
    assert_eq!(labels, ["L_0", "L_1", "L_2"]);
}

#[test]
fn companion_trace_terminated_branches() {
    let out = qwhile(&["trace", fixture("companion.qw").to_str().unwrap(), "--n", "5"]);
    let steps = json(&out)["steps"].as_array().unwrap().clone();
    assert_eq!(steps.len(), 6);
    let last = amplitudes(&steps[5]["state"]);
    let regs = r#"{"c":0,"q":0}"#.to_string();
    for tape in ["11", "1111"] {
        let (re, im) = last[&(tape.to_string(), regs.clone())];
        assert!((re - 0.5).abs() <= 1e-9 && im.abs() <= 1e-9, "tape {tape}: {re}");
    }
}

#[test]
fn fixpoint_examples() {
    let out = qwhile(&["fixpoint", fixture("x_loop.qw").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["converged"].as_bool().unwrap());
    assert!((v["terminated_mass"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert_eq!(v["increments"].as_array().unwrap().iter().filter(|x| x.as_f64().unwrap() > 0.0).count(), 2);

    let out = qwhile(&["fixpoint", fixture("h_loop.qw").to_str().unwrap(), "--eps", "1e-6"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["terminated_mass"].as_f64().unwrap() >= 1.0 - 1e-6);
}

#[test]
fn counter_loop_window() {
    let path = fixture("counter_loop.qw");
    let out = qwhile(&["fixpoint", path.to_str().unwrap(), "--window", "1"]);
    let v = json(&out);
    assert!(v["iterations"].as_u64().unwrap() < 5);
    let notes = v["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("premature")), "{notes:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("premature"));

    for window in ["6", "8"] {
        let v = json(&qwhile(&["fixpoint", path.to_str().unwrap(), "--window", window]));
        assert!(v["converged"].as_bool().unwrap());
        assert!((v["terminated_mass"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn fixpoint_reports_non_convergence() {
    let out = qwhile(&["fixpoint", fixture("h_loop.qw").to_str().unwrap(), "--max-iter", "5"]);
    assert_eq!(code(&out), 4);
    assert!(!json(&out)["converged"].as_bool().unwrap());
}

#[test]
fn error_exit_codes() {
    let f = |name: &str| fixture(name).to_str().unwrap().to_string();
    assert_eq!(code(&qwhile(&["run", &f("invalid/unclosed_block.qw")])), 1);
    assert_eq!(code(&qwhile(&["run", &f("invalid/undeclared.qw")])), 2);
    assert_eq!(code(&qwhile(&["fixpoint", &f("invalid/no_loop.qw")])), 2);
    assert_eq!(code(&qwhile(&["run", &f("h_loop.qw")])), 3);
    assert_eq!(code(&qwhile(&["run", &f("h_loop.qw"), "--mode", "linear"])), 0);
    assert_eq!(code(&qwhile(&["run", &f("does_not_exist.qw")])), 6);
    let out = qwhile(&["run", &f("invalid/undeclared.qw")]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("undeclared.qw:2:"));
}

#[test]
fn check_passes_and_is_deterministic() {
    let a = qwhile(&["check", "--nmax", "4", "--trials", "100", "--seed", "7"]);
    let b = qwhile(&["check", "--nmax", "4", "--trials", "100", "--seed", "7"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&qwhile(&["check"])), 0);
}

#[test]
fn check_catches_mutation() {
    let out = qwhile(&["check", "--nmax", "3", "--trials", "16", "--mutate"]);
    assert_eq!(code(&out), 5);
    let v = json(&out);
    assert_eq!(v["closed_vs_recursive_w"]["pass"], false);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["run", "fixtures/companion.qw", "--n", "7"];
    assert_eq!(qwhile(&args).stdout, qwhile(&args).stdout);
}

#[test]
fn pretty_output() {
    let out = qwhile(&["run", fixture("x_loop.qw").to_str().unwrap(), "--n", "2", "--pretty"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("terminated mass 1.000000000"), "{text}");
    assert!(text.contains("|10…⟩ q=0"), "{text}");
    assert_ne!(code(&qwhile(&["run", "fixtures/x_loop.qw", "--n", "2", "--pretty", "--json"])), 0);
}

/// Resolves the sibling `$ref`s between the shipped schema files.
struct SchemaDir;

impl jsonschema::Retrieve for SchemaDir {
    fn retrieve(&self, uri: &jsonschema::Uri<String>) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let file = uri.path().as_str().rsplit('/').next().unwrap_or_default();
        Ok(serde_json::from_str(&std::fs::read_to_string(root().join("docs/schema").join(file))?)?)
    }
}

fn validator(name: &str) -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(root().join("docs/schema").join(name)).unwrap()).unwrap();
    jsonschema::options().with_retriever(SchemaDir).build(&schema).expect("schema compiles")
}

#[test]
fn outputs_validate_against_schemas() {
    let cases: [(&str, &[&str]); 5] = [
        ("run_output.schema.json", &["run", "fixtures/companion.qw", "--n", "5"]),
        ("run_output.schema.json", &["fixpoint", "fixtures/h_loop.qw"]),
        ("trace_output.schema.json", &["trace", "fixtures/companion.qw", "--n", "3", "--mode", "linear"]),
        ("trace_output.schema.json", &["trace", "fixtures/skip.qw"]),
        ("suite_report.schema.json", &["check", "--nmax", "2", "--trials", "8"]),
    ];
    for (schema, args) in cases {
        let v = json(&qwhile(args));
        let validator = validator(schema);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}
