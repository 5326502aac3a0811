//! Evaluation of core programs on sparse states.
//!
//! Every loop iteration allocates a fresh tape ancilla, copies the guard
//! into it and runs the body controlled on all of the loop's ancillas so
//! far. Branches whose fresh ancilla stays 0 have left the loop and are
//! never touched again. At loop exit the still-running branch is either
//! kept ([`Mode::Unitary`], giving `W_n`) or dropped ([`Mode::Linear`],
//! giving `L_n`).

mod machine;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{GateError, GuardPredicate};
use crate::lang::{CoreProgram, CoreStmt, SlotId};
use crate::state::{Ket, ProjectorSpec, StateError};
use machine::Machine;

pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_WINDOW: usize = 8;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_PRUNE_EPS: f64 = 0.0;
pub const DEFAULT_ANCILLA_BUDGET: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Unitary,
    Linear,
}

/// How unbounded loops decide when to stop. Bounded loops always run their
/// own bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stopping {
    /// Exactly `n` iterations (fewer if every branch has already left).
    Bound(usize),
    /// Stop once the last `window` increments are all below `eps`, or after
    /// `max_iter` iterations without that happening.
    Converge { eps: f64, window: usize, max_iter: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub mode: Mode,
    pub stopping: Stopping,
    /// Amplitudes with modulus at or below this are dropped.
    pub prune_eps: f64,
    /// Maximum number of ancillas one evaluation may allocate.
    pub ancilla_budget: usize,
}

impl EvalConfig {
    pub fn bounded(mode: Mode, n: usize) -> Self {
        EvalConfig { mode, stopping: Stopping::Bound(n), prune_eps: DEFAULT_PRUNE_EPS, ancilla_budget: DEFAULT_ANCILLA_BUDGET }
    }

    pub fn converge(mode: Mode, eps: f64, window: usize, max_iter: usize) -> Self {
        EvalConfig {
            mode,
            stopping: Stopping::Converge { eps, window, max_iter },
            prune_eps: DEFAULT_PRUNE_EPS,
            ancilla_budget: DEFAULT_ANCILLA_BUDGET,
        }
    }

    pub fn with_prune_eps(mut self, eps: f64) -> Self {
        self.prune_eps = eps;
        self
    }

    pub fn with_ancilla_budget(mut self, budget: usize) -> Self {
        self.ancilla_budget = budget;
        self
    }

    pub fn check(&self) -> Result<(), EvalError> {
        if self.prune_eps.is_nan() || self.prune_eps < 0.0 {
            return Err(EvalError::Config(format!("prune_eps must be >= 0, got {}", self.prune_eps)));
        }
        if let Stopping::Converge { eps, window, max_iter } = self.stopping {
            if eps.is_nan() || eps <= 0.0 {
                return Err(EvalError::Config(format!("eps must be > 0, got {eps}")));
            }
            if window == 0 {
                return Err(EvalError::Config("window must be >= 1".into()));
            }
            if max_iter == 0 {
                return Err(EvalError::Config("max_iter must be >= 1".into()));
            }
        }
        Ok(())
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig::converge(Mode::Linear, DEFAULT_EPS, DEFAULT_WINDOW, DEFAULT_MAX_ITER)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("ancilla budget of {0} exhausted")]
    AncillaBudget(usize),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("a single loop step needs a body that allocates no ancillas")]
    BodyAllocates,
    #[error("slot {0} used before its guard copy")]
    UnboundSlot(SlotId),
    #[error("the still-running projector needs n >= 1")]
    EmptyProjector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub final_state: Ket,
    /// Loop iterations executed, nested loops included.
    pub iterations_run: usize,
    /// Per-iteration increments of the top-level loops, in order. In linear
    /// mode this is the norm of the newly exited part, in unitary mode the
    /// norm of the change of the whole state.
    pub increments: Vec<f64>,
    /// Weight of the branches that have left every loop.
    pub terminated_mass: f64,
    /// Weight still inside a top-level loop when it stopped.
    pub running_mass: f64,
    pub converged: bool,
    pub ancillas_used: usize,
    pub notes: Vec<String>,
}

/// State after a top-level loop iteration (`iteration = 0` is the loop entry).
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub label: String,
    pub loop_index: usize,
    pub iteration: usize,
    pub state: Ket,
}

/// `P_{1^n}`: all of `t_1..t_n` equal 1.
pub fn still_running_projector(n: usize) -> Result<ProjectorSpec, EvalError> {
    if n == 0 {
        return Err(EvalError::EmptyProjector);
    }
    Ok(ProjectorSpec::new((1..=n).map(|i| (i, true)).collect())?)
}

pub struct Interpreter<'p> {
    program: &'p CoreProgram,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p CoreProgram) -> Self {
        Interpreter { program }
    }

    pub fn program(&self) -> &CoreProgram {
        self.program
    }

    pub fn eval(&self, input: &Ket, cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
        run(&self.program.body, input, cfg, None)
    }

    /// Like [`eval`](Self::eval) and calls `observer` at the entry of every
    /// top-level loop and after each of its iterations. A loop-free program
    /// produces one snapshot labelled `final`.
    pub fn eval_traced(&self, input: &Ket, cfg: &EvalConfig, observer: &mut dyn FnMut(Snapshot)) -> Result<EvalReport, EvalError> {
        let mut seen = false;
        let mut wrapped = |s: Snapshot| {
            seen = true;
            observer(s)
        };
        let report = run(&self.program.body, input, cfg, Some(&mut wrapped))?;
        if !seen {
            observer(Snapshot { label: "final".into(), loop_index: 0, iteration: 0, state: report.final_state.clone() });
        }
        Ok(report)
    }

    /// Iteration `i` of the unrolled loop as a bare circuit: the guard copy
    /// into `t_i` controlled on `t_1..t_{i-1}`, then the body controlled on
    /// `t_1..t_i`.
    pub fn loop_step(&self, guard: &GuardPredicate, body: &CoreStmt, ket: &Ket, i: usize) -> Result<Ket, EvalError> {
        if i == 0 {
            return Err(EvalError::Gate(GateError::AncillaZero));
        }
        if body.allocates() {
            return Err(EvalError::BodyAllocates);
        }
        Machine::new(EvalConfig::bounded(Mode::Unitary, 0), None).step(guard, body, ket.clone(), i)
    }

    /// `W_n` applied to `ket`.
    pub fn eval_unitary_n(&self, guard: &GuardPredicate, body: &CoreStmt, ket: &Ket, n: usize) -> Result<Ket, EvalError> {
        Ok(run_loop(guard, body, ket, &EvalConfig::bounded(Mode::Unitary, n))?.final_state)
    }

    /// `L_n` applied to `ket`.
    pub fn eval_linear_n(&self, guard: &GuardPredicate, body: &CoreStmt, ket: &Ket, n: usize) -> Result<Ket, EvalError> {
        Ok(run_loop(guard, body, ket, &EvalConfig::bounded(Mode::Linear, n))?.final_state)
    }

    /// Iterates `L_n` until the stall window is met; see [`Stopping::Converge`].
    pub fn fixpoint(
        &self,
        guard: &GuardPredicate,
        body: &CoreStmt,
        ket: &Ket,
        eps: f64,
        window: usize,
        max_iter: usize,
    ) -> Result<EvalReport, EvalError> {
        run_loop(guard, body, ket, &EvalConfig::converge(Mode::Linear, eps, window, max_iter))
    }

    /// `‖L_n ψ‖²`.
    pub fn terminated_mass(&self, guard: &GuardPredicate, body: &CoreStmt, ket: &Ket, n: usize) -> Result<f64, EvalError> {
        Ok(self.eval_linear_n(guard, body, ket, n)?.norm_sqr())
    }
}

fn run_loop(guard: &GuardPredicate, body: &CoreStmt, ket: &Ket, cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    let stmt = CoreStmt::While { guard: *guard, body: Box::new(body.clone()), bound: None };
    run(&stmt, ket, cfg, None)
}

fn run(body: &CoreStmt, input: &Ket, cfg: &EvalConfig, observer: Option<&mut dyn FnMut(Snapshot)>) -> Result<EvalReport, EvalError> {
    cfg.check()?;
    let mut machine = Machine::new(*cfg, observer);
    let start = input.clone().with_prune_eps(cfg.prune_eps);
    let final_state = machine.exec(body, start, &[])?;

    let terminated_mass = machine.terminated_mass(&final_state);
    let mut notes = Vec::new();
    let mut increments = Vec::new();
    let mut running_mass = 0.0;
    let mut converged = true;
    for (k, lp) in machine.top_loops.iter().enumerate() {
        increments.extend_from_slice(&lp.increments);
        running_mass += lp.running_mass;
        if matches!(cfg.stopping, Stopping::Bound(_)) {
            converged &= lp.exhausted;
        } else {
            converged &= lp.converged;
        }
        let eps = match cfg.stopping {
            Stopping::Converge { eps, .. } => eps,
            Stopping::Bound(_) => 0.0,
        };
        if lp.stalled && lp.running_mass > eps {
            notes.push(format!(
                "loop {k}: stall window met after {} iterations with running mass {:.6e} still inside; the stop may be premature",
                lp.iterations, lp.running_mass
            ));
        }
        if lp.hit_max_iter {
            notes.push(format!("loop {k}: max_iter {} reached without convergence", lp.iterations));
        }
    }
    Ok(EvalReport {
        final_state,
        iterations_run: machine.iterations,
        increments,
        terminated_mass,
        running_mass,
        converged,
        ancillas_used: machine.ancillas_used,
        notes,
    })
}
