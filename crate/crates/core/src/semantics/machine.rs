use std::collections::HashMap;

use num_complex::Complex64;

use super::{EvalConfig, EvalError, Mode, Snapshot, Stopping};
use crate::gates::{ControlSpec, GuardFlip, GuardPredicate, Qubit};
use crate::lang::{CoreControl, CoreStmt, GateOp, SlotId};
use crate::state::{add_scaled, BasisLabel, Ket};

/// Outcome of one execution of a top-level loop.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct LoopOutcome {
    pub iterations: usize,
    pub increments: Vec<f64>,
    pub converged: bool,
    /// Stopped because every branch left the loop.
    pub exhausted: bool,
    /// Stopped by the stall window rather than exhaustion or the bound.
    pub stalled: bool,
    pub hit_max_iter: bool,
    pub running_mass: f64,
}

enum Limit {
    Fixed(usize),
    Converge { eps: f64, window: usize, max_iter: usize },
}

/// Sequential evaluator over sparse kets with a single global ancilla tape.
pub(crate) struct Machine<'o> {
    cfg: EvalConfig,
    next_ancilla: usize,
    slots: HashMap<SlotId, usize>,
    pub ancillas_used: usize,
    pub iterations: usize,
    pub top_loops: Vec<LoopOutcome>,
    /// Ancillas that are all 1 exactly on a loop execution's still-running
    /// branch (enclosing iteration ancillas plus the loop's own).
    pub running_masks: Vec<Vec<usize>>,
    observer: Option<&'o mut dyn FnMut(Snapshot)>,
    depth: usize,
}

impl<'o> Machine<'o> {
    pub fn new(cfg: EvalConfig, observer: Option<&'o mut dyn FnMut(Snapshot)>) -> Self {
        Machine {
            cfg,
            next_ancilla: 1,
            slots: HashMap::new(),
            ancillas_used: 0,
            iterations: 0,
            top_loops: Vec::new(),
            running_masks: Vec::new(),
            observer,
            depth: 0,
        }
    }

    fn alloc(&mut self) -> Result<usize, EvalError> {
        if self.ancillas_used >= self.cfg.ancilla_budget {
            return Err(EvalError::AncillaBudget(self.cfg.ancilla_budget));
        }
        let t = self.next_ancilla;
        self.next_ancilla += 1;
        self.ancillas_used += 1;
        Ok(t)
    }

    fn controls(&self, ctx: &[usize], extra: &[CoreControl]) -> Result<ControlSpec, EvalError> {
        let mut spec = ControlSpec::positive(ctx.iter().map(|&t| Qubit::Ancilla(t)));
        for c in extra {
            match *c {
                CoreControl::Reg { reg, positive: true } => spec.positive.push(Qubit::reg(reg)),
                CoreControl::Reg { reg, positive: false } => spec.negative.push(Qubit::reg(reg)),
                CoreControl::Slot(slot) => {
                    let t = *self.slots.get(&slot).ok_or(EvalError::UnboundSlot(slot))?;
                    spec.positive.push(Qubit::Ancilla(t));
                }
            }
        }
        Ok(spec)
    }

    /// Runs `stmt` on `ket`; every primitive is controlled on the ancillas in `ctx`.
    pub fn exec(&mut self, stmt: &CoreStmt, ket: Ket, ctx: &[usize]) -> Result<Ket, EvalError> {
        match stmt {
            CoreStmt::Skip => Ok(ket),
            CoreStmt::Seq(stmts) => stmts.iter().try_fold(ket, |k, s| self.exec(s, k, ctx)),
            CoreStmt::Apply { op, controls } => {
                let spec = self.controls(ctx, controls)?;
                Ok(match op {
                    GateOp::Matrix { matrix, targets } => ket.apply_local(matrix, targets, &spec)?,
                    GateOp::Shift(shift) => shift.apply(&ket, &spec),
                })
            }
            CoreStmt::GuardCopy { guard, slot, controls } => {
                let spec = self.controls(ctx, controls)?;
                let t = self.alloc()?;
                self.slots.insert(*slot, t);
                Ok(GuardFlip { guard: *guard, ancilla: t, controls: spec }.apply(&ket))
            }
            CoreStmt::While { guard, body, bound } => self.exec_while(guard, body, *bound, ket, ctx),
        }
    }

    /// One unrolled iteration as a plain circuit step: guard copy into
    /// `t_i` controlled on `t_1..t_{i-1}`, then the body controlled on
    /// `t_1..t_i`. No branch bookkeeping.
    pub fn step(&mut self, guard: &GuardPredicate, body: &CoreStmt, ket: Ket, i: usize) -> Result<Ket, EvalError> {
        let prior: Vec<usize> = (1..i).collect();
        let flip = GuardFlip { guard: *guard, ancilla: i, controls: ControlSpec::positive(prior.iter().map(|&t| Qubit::Ancilla(t))) };
        let ket = flip.apply(&ket);
        let all: Vec<usize> = (1..=i).collect();
        self.exec(body, ket, &all)
    }

    fn observe(&mut self, iteration: usize, parts: &[&Ket]) {
        if self.depth != 0 {
            return;
        }
        let Some(obs) = self.observer.as_mut() else { return };
        let mut state = Ket::zero().with_prune_eps(self.cfg.prune_eps);
        for p in parts {
            state.absorb((*p).clone());
        }
        let prefix = match self.cfg.mode {
            Mode::Unitary => "W",
            Mode::Linear => "L",
        };
        obs(Snapshot { label: format!("{prefix}_{iteration}"), loop_index: self.top_loops.len(), iteration, state });
    }

    fn exec_while(
        &mut self,
        guard: &GuardPredicate,
        body: &CoreStmt,
        bound: Option<usize>,
        ket: Ket,
        ctx: &[usize],
    ) -> Result<Ket, EvalError> {
        let limit = match (bound, self.cfg.stopping) {
            (Some(k), _) => Limit::Fixed(k),
            (None, Stopping::Bound(n)) => Limit::Fixed(n),
            (None, Stopping::Converge { eps, window, max_iter }) => Limit::Converge { eps, window, max_iter },
        };
        let mode = self.cfg.mode;
        let prune = self.cfg.prune_eps;
        let ctx_spec = ControlSpec::positive(ctx.iter().map(|&t| Qubit::Ancilla(t))).compile();
        let (mut active, inactive) = ket.split(|l| ctx_spec.holds(l));
        let mut exited = Ket::zero().with_prune_eps(prune);
        let mut controls: Vec<usize> = ctx.to_vec();
        let mut increments = Vec::new();
        let mut outcome = LoopOutcome {
            iterations: 0,
            increments: Vec::new(),
            converged: false,
            exhausted: false,
            stalled: false,
            hit_max_iter: false,
            running_mass: 0.0,
        };

        match mode {
            Mode::Unitary => self.observe(0, &[&inactive, &active]),
            Mode::Linear => self.observe(0, &[&inactive]),
        }
        let top = self.depth == 0;
        self.depth += 1;

        let mut i = 0usize;
        loop {
            if active.is_empty() {
                outcome.exhausted = true;
                outcome.converged = true;
                break;
            }
            match limit {
                Limit::Fixed(k) if i >= k => break,
                Limit::Converge { eps, window, .. }
                    if increments.len() >= window && increments[increments.len() - window..].iter().all(|&d| d < eps) =>
                {
                    outcome.stalled = true;
                    outcome.converged = true;
                    break;
                }
                Limit::Converge { max_iter, .. } if i >= max_iter => {
                    outcome.hit_max_iter = true;
                    break;
                }
                _ => {}
            }
            i += 1;
            let t = self.alloc()?;
            let flip = GuardFlip {
                guard: *guard,
                ancilla: t,
                controls: ControlSpec::positive(controls.iter().map(|&a| Qubit::Ancilla(a))),
            };
            let before = (mode == Mode::Unitary).then(|| active.clone());
            let flipped = flip.apply(&active);
            let (running, out) = flipped.split(|l| l.ancilla(t));
            controls.push(t);
            let running = self.exec(body, running, &controls)?;
            let increment = match before {
                None => out.norm(),
                Some(before) => {
                    let mut after = out.clone();
                    after.absorb(running.clone());
                    add_scaled(Complex64::new(-1.0, 0.0), &before, &after).norm()
                }
            };
            increments.push(increment);
            exited.absorb(out);
            active = running;
            self.iterations += 1;

            if top {
                self.depth -= 1;
                match mode {
                    Mode::Unitary => self.observe(i, &[&inactive, &exited, &active]),
                    Mode::Linear => self.observe(i, &[&inactive, &exited]),
                }
                self.depth += 1;
            }
        }
        self.depth -= 1;

        outcome.iterations = i;
        outcome.running_mass = active.norm_sqr();
        outcome.increments = increments;
        if !active.is_empty() {
            self.running_masks.push(controls);
        }
        if top {
            self.top_loops.push(outcome);
        }

        let mut result = inactive;
        result.absorb(exited);
        if mode == Mode::Unitary {
            result.absorb(active);
        }
        Ok(result)
    }

    /// Squared weight of the terms that are not still running in any loop.
    pub fn terminated_mass(&self, ket: &Ket) -> f64 {
        ket.iter()
            .filter(|(l, _)| !self.running_masks.iter().any(|mask| all_set(l, mask)))
            .map(|(_, a)| a.norm_sqr())
            .fold(0.0, |acc, x| acc + x)
    }
}

fn all_set(label: &BasisLabel, ancillas: &[usize]) -> bool {
    ancillas.iter().all(|&t| label.ancilla(t))
}
