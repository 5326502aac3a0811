use qwhile_web::{mass_curve_values, run_json, trace_json};
use serde_json::Value;

const H_LOOP: &str = "qubit q; h q; while q { h q; }";

#[test]
fn run_reports_json() {
    let v: Value = serde_json::from_str(&run_json(H_LOOP, "unitary", Some(2)).unwrap()).unwrap();
    assert_eq!(v["iterations"], 2);
    assert!((v["terminated_mass"].as_f64().unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn unbounded_unitary_needs_n() {
    assert!(run_json(H_LOOP, "unitary", None).is_err());
    assert!(run_json(H_LOOP, "linear", None).is_ok());
    assert!(run_json("qubit q; x q;", "unitary", None).is_ok());
}

#[test]
fn errors_are_messages() {
    assert!(run_json("qubit q; while q {", "linear", Some(1)).unwrap_err().contains("syntax"));
    assert!(run_json("x r;", "linear", Some(1)).unwrap_err().contains("undeclared"));
    assert!(run_json(H_LOOP, "classical", Some(1)).is_err());
}

#[test]
fn trace_labels() {
    let v: Value = serde_json::from_str(&trace_json(H_LOOP, "linear", Some(2)).unwrap()).unwrap();
    let labels: Vec<&str> = v["steps"].as_array().unwrap().iter().map(|s| s["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["L_0", "L_1", "L_2"]);
}

#[test]
fn mass_curve_is_geometric() {
    let curve = mass_curve_values(H_LOOP, 10).unwrap();
    assert_eq!(curve.len(), 11);
    for (n, m) in curve.iter().enumerate() {
        assert!((m - (1.0 - 2f64.powi(-(n as i32)))).abs() < 1e-12, "n={n}: {m}");
    }
}

#[test]
fn mass_curve_pads_after_exact_termination() {
    let curve = mass_curve_values("qubit q; h q; while q { x q; }", 6).unwrap();
    let want = [0.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0];
    assert_eq!(curve.len(), want.len());
    assert!(curve.iter().zip(want).all(|(c, w)| (c - w).abs() < 1e-12), "{curve:?}");
    assert!(mass_curve_values("qubit q; x q;", 3).is_err());
}
