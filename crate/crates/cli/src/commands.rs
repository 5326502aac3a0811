use std::fs;
use std::path::Path;

use qwhile::lang::{desugar, parse, CoreProgram, CoreStmt, ParseError};
use qwhile::oracle::{default_suite, Variant};
use qwhile::report::{RunOutput, TraceOutput};
use qwhile::semantics::{EvalConfig, EvalError, Interpreter, Mode, Stopping, DEFAULT_ANCILLA_BUDGET};

use crate::render;

pub const EXIT_SYNTAX: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_UNBOUNDED: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;
pub const EXIT_CHECK_FAILED: u8 = 5;
pub const EXIT_RUNTIME: u8 = 6;

#[derive(Clone, Copy, Debug)]
pub struct Stall {
    pub eps: f64,
    pub window: usize,
    pub max_iter: usize,
}

#[derive(Debug)]
pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub warning: Option<String>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

fn eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::Config(_) => CliError::new(EXIT_INVALID, e.to_string()),
        other => CliError::new(EXIT_RUNTIME, other.to_string()),
    }
}

fn load(path: &Path) -> Result<CoreProgram, CliError> {
    let name = path.display();
    let src = fs::read_to_string(path).map_err(|e| CliError::new(EXIT_RUNTIME, format!("cannot read {name}: {e}")))?;
    let program = parse(&src).map_err(|e| match e {
        ParseError::Syntax(s) => CliError::new(EXIT_SYNTAX, format!("{name}:{s}")),
        ParseError::Invalid(diags) => {
            let lines: Vec<String> = diags.iter().map(|d| format!("{name}:{d}")).collect();
            CliError::new(EXIT_INVALID, lines.join("\n"))
        }
    })?;
    desugar(&program).map_err(|e| CliError::new(EXIT_INVALID, format!("{name}: {e}")))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("output types serialise");
    s.push('\n');
    s
}

pub fn run(path: &Path, mode: Mode, n: Option<usize>, prune: f64, stall: Stall, pretty: bool, trace: bool) -> Result<Output, CliError> {
    let program = load(path)?;
    let stopping = match n {
        Some(n) => Stopping::Bound(n),
        None if mode == Mode::Unitary && program.body.contains_unbounded_loop() => {
            return Err(CliError::new(
                EXIT_UNBOUNDED,
                "an unbounded while has no unitary meaning (the approximations W_n never settle); pass --n or use --mode linear",
            ));
        }
        None => Stopping::Converge { eps: stall.eps, window: stall.window, max_iter: stall.max_iter },
    };
    let cfg = EvalConfig { mode, stopping, prune_eps: prune, ancilla_budget: DEFAULT_ANCILLA_BUDGET };
    let interp = Interpreter::new(&program);
    let input = program.initial_state();

    if trace {
        let mut snaps = Vec::new();
        let report = interp.eval_traced(&input, &cfg, &mut |s| snaps.push(s)).map_err(eval_error)?;
        let out = TraceOutput::new(mode, &snaps, &program.layout);
        let stdout = if pretty { render::trace(&out) } else { to_json(&out) };
        return Ok(Output { code: 0, stdout, warning: notes_warning(&report.notes) });
    }

    let report = interp.eval(&input, &cfg).map_err(eval_error)?;
    let out = RunOutput::new(&report, mode, &program.layout);
    let stdout = if pretty { render::run(&out) } else { to_json(&out) };
    Ok(Output { code: 0, stdout, warning: notes_warning(&report.notes) })
}

fn notes_warning(notes: &[String]) -> Option<String> {
    (!notes.is_empty()).then(|| notes.iter().map(|n| format!("note: {n}")).collect::<Vec<_>>().join("\n"))
}

pub fn fixpoint(path: &Path, stall: Stall, prune: f64, pretty: bool) -> Result<Output, CliError> {
    let program = load(path)?;
    if !matches!(program.body.top_level().last(), Some(CoreStmt::While { .. })) {
        return Err(CliError::new(EXIT_INVALID, format!("{}: fixpoint needs a program ending in a while loop", path.display())));
    }
    let cfg = EvalConfig::converge(Mode::Linear, stall.eps, stall.window, stall.max_iter).with_prune_eps(prune);
    let report = Interpreter::new(&program).eval(&program.initial_state(), &cfg).map_err(eval_error)?;
    let out = RunOutput::new(&report, Mode::Linear, &program.layout);
    let stdout = if pretty { render::run(&out) } else { to_json(&out) };
    let code = if report.converged { 0 } else { EXIT_NOT_CONVERGED };
    Ok(Output { code, stdout, warning: notes_warning(&report.notes) })
}

pub fn check(n_max: usize, trials: usize, seed: u64, mutate: bool, pretty: bool) -> Result<Output, CliError> {
    let variant = if mutate { Variant::ClosedOffByOne } else { Variant::Closed };
    let report = default_suite(n_max, trials, seed, variant).map_err(|e| CliError::new(EXIT_RUNTIME, e.to_string()))?;
    let stdout = if pretty { render::suite(&report) } else { to_json(&report) };
    let code = if report.passed() { 0 } else { EXIT_CHECK_FAILED };
    Ok(Output { code, stdout, warning: None })
}
