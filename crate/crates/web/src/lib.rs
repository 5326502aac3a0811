//! WebAssembly bindings behind `www/index.html`.
//!
//! The plain functions return JSON strings so they can be tested natively;
//! the `#[wasm_bindgen]` wrappers only convert errors.

use qwhile::lang::{desugar, parse, CoreProgram, ParseError};
use qwhile::report::{RunOutput, TraceOutput};
use qwhile::semantics::{EvalConfig, Interpreter, Mode, DEFAULT_EPS, DEFAULT_MAX_ITER, DEFAULT_WINDOW};
use wasm_bindgen::prelude::*;

/// Browser tabs have no business allocating millions of ancillas.
const WEB_ANCILLA_BUDGET: usize = 1 << 14;

fn load(source: &str) -> Result<CoreProgram, String> {
    let program = parse(source).map_err(|e| match e {
        ParseError::Syntax(s) => format!("syntax error at {s}"),
        ParseError::Invalid(diags) => diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"),
    })?;
    desugar(&program).map_err(|e| e.to_string())
}

fn parse_mode(mode: &str) -> Result<Mode, String> {
    match mode {
        "unitary" => Ok(Mode::Unitary),
        "linear" => Ok(Mode::Linear),
        other => Err(format!("unknown mode `{other}`")),
    }
}

fn config(program: &CoreProgram, mode: Mode, n: Option<u32>) -> Result<EvalConfig, String> {
    let cfg = match n {
        Some(n) => EvalConfig::bounded(mode, n as usize),
        None if mode == Mode::Unitary && program.body.contains_unbounded_loop() => {
            return Err("an unbounded while needs an iteration count in unitary mode".into());
        }
        None => EvalConfig::converge(mode, DEFAULT_EPS, DEFAULT_WINDOW, DEFAULT_MAX_ITER),
    };
    Ok(cfg.with_ancilla_budget(WEB_ANCILLA_BUDGET))
}

/// Evaluates `source` and returns the run report as JSON.
pub fn run_json(source: &str, mode: &str, n: Option<u32>) -> Result<String, String> {
    let program = load(source)?;
    let mode = parse_mode(mode)?;
    let cfg = config(&program, mode, n)?;
    let report = Interpreter::new(&program).eval(&program.initial_state(), &cfg).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&RunOutput::new(&report, mode, &program.layout)).expect("serialisable"))
}

/// Per-iteration state dumps as JSON.
pub fn trace_json(source: &str, mode: &str, n: Option<u32>) -> Result<String, String> {
    let program = load(source)?;
    let mode = parse_mode(mode)?;
    let cfg = config(&program, mode, n)?;
    let mut snaps = Vec::new();
    Interpreter::new(&program)
        .eval_traced(&program.initial_state(), &cfg, &mut |s| snaps.push(s))
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&TraceOutput::new(mode, &snaps, &program.layout)).expect("serialisable"))
}

/// Terminated mass ‖L_n ψ‖² for n = 0..=n_max, following the first
/// top-level loop. Loops that finish early repeat their final mass.
pub fn mass_curve_values(source: &str, n_max: u32) -> Result<Vec<f64>, String> {
    let program = load(source)?;
    let cfg = EvalConfig::bounded(Mode::Linear, n_max as usize).with_ancilla_budget(WEB_ANCILLA_BUDGET);
    let mut curve = Vec::new();
    Interpreter::new(&program)
        .eval_traced(&program.initial_state(), &cfg, &mut |s| {
            if s.loop_index == 0 && s.label != "final" {
                curve.push(s.state.norm_sqr());
            }
        })
        .map_err(|e| e.to_string())?;
    if curve.is_empty() {
        return Err("the program has no loop".into());
    }
    let last = *curve.last().unwrap();
    curve.resize(n_max as usize + 1, last);
    Ok(curve)
}

#[wasm_bindgen]
pub fn run(source: &str, mode: &str, n: Option<u32>) -> Result<String, JsError> {
    run_json(source, mode, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn trace(source: &str, mode: &str, n: Option<u32>) -> Result<String, JsError> {
    trace_json(source, mode, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn mass_curve(source: &str, n_max: u32) -> Result<Vec<f64>, JsError> {
    mass_curve_values(source, n_max).map_err(|e| JsError::new(&e))
}
