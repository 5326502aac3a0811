//! Lowering of checked programs into the core form the evaluators run.
//!
//! Names become register indices, gates become matrices or register shifts,
//! and every `if` becomes a guard copy into a fresh ancilla followed by its
//! body controlled on that ancilla.

use thiserror::Error;

use super::ast::{Guard, Program, Span, Stmt};
use super::validate::{validate, Diagnostic};
use crate::gates::{matrix_of, GateKind, GuardPredicate, GuardTest, Qubit, RegisterShift};
use crate::linalg::CMatrix;
use crate::state::{BasisLabel, Ket, RegisterLayout};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesugarError {
    #[error("program is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("{0}: a while loop inside an if body is not supported")]
    LoopInsideIf(Span),
}

/// Ancilla allocated when its guard copy runs; bound at evaluation time.
pub type SlotId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoreControl {
    Reg { reg: usize, positive: bool },
    /// Positive control on the ancilla bound to the slot.
    Slot(SlotId),
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateOp {
    /// Dense unitary on qubit targets, first target most significant.
    Matrix { matrix: CMatrix, targets: Vec<Qubit> },
    Shift(RegisterShift),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoreStmt {
    Skip,
    Apply { op: GateOp, controls: Vec<CoreControl> },
    /// Copies the guard's truth value into a fresh ancilla bound to `slot`.
    GuardCopy { guard: GuardPredicate, slot: SlotId, controls: Vec<CoreControl> },
    Seq(Vec<CoreStmt>),
    /// `bound = Some(k)` is the k-bounded loop.
    While { guard: GuardPredicate, body: Box<CoreStmt>, bound: Option<usize> },
}

impl CoreStmt {
    pub fn seq(stmts: Vec<CoreStmt>) -> CoreStmt {
        let mut flat = Vec::new();
        for s in stmts {
            match s {
                CoreStmt::Seq(inner) => flat.extend(inner),
                CoreStmt::Skip => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => CoreStmt::Skip,
            1 => flat.pop().unwrap(),
            _ => CoreStmt::Seq(flat),
        }
    }

    pub fn contains_loop(&self) -> bool {
        match self {
            CoreStmt::While { .. } => true,
            CoreStmt::Seq(v) => v.iter().any(CoreStmt::contains_loop),
            _ => false,
        }
    }

    pub fn contains_unbounded_loop(&self) -> bool {
        match self {
            CoreStmt::While { bound: None, .. } => true,
            CoreStmt::While { body, .. } => body.contains_unbounded_loop(),
            CoreStmt::Seq(v) => v.iter().any(CoreStmt::contains_unbounded_loop),
            _ => false,
        }
    }

    /// True when running the statement allocates ancillas.
    pub fn allocates(&self) -> bool {
        match self {
            CoreStmt::While { .. } | CoreStmt::GuardCopy { .. } => true,
            CoreStmt::Seq(v) => v.iter().any(CoreStmt::allocates),
            _ => false,
        }
    }

    /// Top-level statements in order.
    pub fn top_level(&self) -> Vec<&CoreStmt> {
        match self {
            CoreStmt::Seq(v) => v.iter().collect(),
            CoreStmt::Skip => Vec::new(),
            other => vec![other],
        }
    }
}

/// A lowered program: register layout, initial basis values and body.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreProgram {
    pub layout: RegisterLayout,
    pub init: Vec<u64>,
    pub body: CoreStmt,
}

impl CoreProgram {
    pub fn initial_label(&self) -> BasisLabel {
        BasisLabel::new(self.init.clone())
    }

    /// The declared classical basis state with an all-zero tape.
    pub fn initial_state(&self) -> Ket {
        Ket::basis(self.initial_label())
    }
}

pub fn desugar(program: &Program) -> Result<CoreProgram, DesugarError> {
    let diags = validate(program);
    if !diags.is_empty() {
        return Err(DesugarError::Invalid(diags));
    }
    let layout = RegisterLayout::new(program.decls.iter().map(|d| (d.name.clone(), d.width)));
    let init = program.decls.iter().map(|d| d.init).collect();
    let mut lower = Lowering { layout: &layout, next_slot: 0 };
    let body = lower.stmt(&program.body, false)?;
    Ok(CoreProgram { layout: layout.clone(), init, body })
}

struct Lowering<'a> {
    layout: &'a RegisterLayout,
    next_slot: SlotId,
}

impl Lowering<'_> {
    fn reg(&self, name: &str) -> usize {
        self.layout.index_of(name).expect("validated program references declared names")
    }

    fn guard(&self, g: &Guard) -> GuardPredicate {
        let reg = self.reg(g.var());
        let test = match g {
            Guard::Qubit(_) => GuardTest::Qubit,
            Guard::GtZero(_) => GuardTest::NonZero,
            Guard::EqConst(_, c) => GuardTest::Equals(*c),
        };
        GuardPredicate { reg, test }
    }

    fn stmt(&mut self, s: &Stmt, in_if: bool) -> Result<CoreStmt, DesugarError> {
        Ok(match s {
            Stmt::Skip => CoreStmt::Skip,
            Stmt::Seq(a, b) => {
                let a = self.stmt(a, in_if)?;
                let b = self.stmt(b, in_if)?;
                CoreStmt::seq(vec![a, b])
            }
            Stmt::Apply { gate, operands, controls, .. } => {
                let regs: Vec<usize> = operands.iter().map(|o| self.reg(o)).collect();
                let op = match gate {
                    GateKind::Inc | GateKind::Dec => {
                        let delta = if *gate == GateKind::Inc { 1 } else { -1 };
                        GateOp::Shift(RegisterShift::new(regs[0], self.layout.width(regs[0]), delta))
                    }
                    g => GateOp::Matrix {
                        matrix: matrix_of(g, None).expect("validated gate has a unitary matrix"),
                        targets: regs.into_iter().map(Qubit::reg).collect(),
                    },
                };
                let controls = controls
                    .iter()
                    .map(|c| CoreControl::Reg { reg: self.reg(&c.var), positive: c.positive })
                    .collect();
                CoreStmt::Apply { op, controls }
            }
            Stmt::While { guard, body, span } | Stmt::BoundedWhile { guard, body, span, .. } => {
                if in_if {
                    return Err(DesugarError::LoopInsideIf(*span));
                }
                let bound = match s {
                    Stmt::BoundedWhile { bound, .. } => Some(*bound),
                    _ => None,
                };
                CoreStmt::While { guard: self.guard(guard), body: Box::new(self.stmt(body, false)?), bound }
            }
            Stmt::If { guard, body, .. } => {
                let slot = self.next_slot;
                self.next_slot += 1;
                let guard = self.guard(guard);
                let body = add_slot_control(self.stmt(body, true)?, slot);
                CoreStmt::seq(vec![CoreStmt::GuardCopy { guard, slot, controls: Vec::new() }, body])
            }
        })
    }
}

fn add_slot_control(s: CoreStmt, slot: SlotId) -> CoreStmt {
    match s {
        CoreStmt::Apply { op, mut controls } => {
            controls.insert(0, CoreControl::Slot(slot));
            CoreStmt::Apply { op, controls }
        }
        CoreStmt::GuardCopy { guard, slot: inner, mut controls } => {
            controls.insert(0, CoreControl::Slot(slot));
            CoreStmt::GuardCopy { guard, slot: inner, controls }
        }
        CoreStmt::Seq(v) => CoreStmt::Seq(v.into_iter().map(|s| add_slot_control(s, slot)).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    #[test]
    fn if_lowers_to_guard_copy_and_controlled_body() {
        let core = desugar(&parse("qubit q; if q { x q; }").unwrap()).unwrap();
        let x = matrix_of(&GateKind::X, None).unwrap();
        assert_eq!(
            core.body,
            CoreStmt::Seq(vec![
                CoreStmt::GuardCopy { guard: GuardPredicate::qubit(0), slot: 0, controls: vec![] },
                CoreStmt::Apply {
                    op: GateOp::Matrix { matrix: x, targets: vec![Qubit::reg(0)] },
                    controls: vec![CoreControl::Slot(0)],
                },
            ])
        );
    }

    #[test]
    fn skip_stays_skip() {
        let core = desugar(&parse("qubit q; skip;").unwrap()).unwrap();
        assert_eq!(core.body, CoreStmt::Skip);
    }

    #[test]
    fn loop_inside_if_rejected() {
        let err = desugar(&parse("qubit q; if q { while q { x q; } }").unwrap()).unwrap_err();
        assert!(matches!(err, DesugarError::LoopInsideIf(_)));
    }

    #[test]
    fn loops_pass_through() {
        let core = desugar(&parse("qubit q; while<3> q { skip; } while q { x q; }").unwrap()).unwrap();
        let top = core.body.top_level();
        assert!(matches!(top[0], CoreStmt::While { bound: Some(3), .. }));
        assert!(matches!(top[1], CoreStmt::While { bound: None, .. }));
    }

    #[test]
    fn nested_if_controls_inner_copy() {
        let core = desugar(&parse("qubit a; qubit b; if a { if b { x a; } }").unwrap()).unwrap();
        let CoreStmt::Seq(v) = &core.body else { panic!() };
        assert!(matches!(&v[1], CoreStmt::GuardCopy { slot: 1, controls, .. } if controls == &vec![CoreControl::Slot(0)]));
        assert!(matches!(&v[2], CoreStmt::Apply { controls, .. } if controls == &vec![CoreControl::Slot(0), CoreControl::Slot(1)]));
    }
}
