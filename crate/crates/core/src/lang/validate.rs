use std::collections::{HashMap, HashSet};
use std::fmt;

use super::ast::{Decl, Guard, Program, Span, Stmt, VarKind};
use crate::gates::{check_unitary, GateKind, UNITARY_TOL};
use crate::linalg::is_power_of_two;

/// Widest `uint` register accepted.
pub const MAX_WIDTH: u32 = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// All invariant violations of a parsed program; empty iff it is valid.
pub fn validate(program: &Program) -> Vec<Diagnostic> {
    let mut v = Validator { vars: HashMap::new(), out: Vec::new() };
    v.decls(&program.decls);
    v.stmt(&program.body);
    v.out
}

struct Validator<'a> {
    vars: HashMap<&'a str, &'a Decl>,
    out: Vec<Diagnostic>,
}

impl<'a> Validator<'a> {
    fn report(&mut self, span: Span, message: impl Into<String>) {
        self.out.push(Diagnostic { span, message: message.into() });
    }

    fn decls(&mut self, decls: &'a [Decl]) {
        for d in decls {
            if self.vars.contains_key(d.name.as_str()) {
                self.report(d.span, format!("duplicate declaration {}", d.name));
                continue;
            }
            if d.width == 0 || d.width > MAX_WIDTH {
                self.report(d.span, format!("width {} of {} out of range 1..={MAX_WIDTH}", d.width, d.name));
            } else if d.kind == VarKind::Qubit && d.width != 1 {
                self.report(d.span, format!("qubit {} must have width 1", d.name));
            } else if d.init >> d.width != 0 {
                self.report(d.span, format!("initial value {} out of range for {} (width {})", d.init, d.name, d.width));
            }
            self.vars.insert(&d.name, d);
        }
    }

    fn lookup(&mut self, name: &str, span: Span) -> Option<&'a Decl> {
        let found = self.vars.get(name).copied();
        if found.is_none() {
            self.report(span, format!("undeclared variable {name}"));
        }
        found
    }

    fn guard(&mut self, g: &Guard, span: Span) {
        let Some(d) = self.lookup(g.var(), span) else { return };
        match g {
            Guard::Qubit(v) if d.kind != VarKind::Qubit => {
                self.report(span, format!("guard {v} is not a qubit; use ({v} > 0) or ({v} == c)"));
            }
            Guard::EqConst(v, c) if d.width < 64 && c >> d.width != 0 => {
                self.report(span, format!("constant {c} out of range for {v} (width {})", d.width));
            }
            _ => {}
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Skip => {}
            Stmt::Seq(a, b) => {
                self.stmt(a);
                self.stmt(b);
            }
            Stmt::While { guard, body, span } | Stmt::BoundedWhile { guard, body, span, .. } | Stmt::If { guard, body, span } => {
                self.guard(guard, *span);
                self.stmt(body);
            }
            Stmt::Apply { gate, operands, controls, span } => {
                let span = *span;
                let mut seen = HashSet::new();
                for op in operands {
                    if !seen.insert(op.as_str()) {
                        self.report(span, format!("duplicate operand {op}"));
                    }
                }
                let decls: Vec<Option<&Decl>> = operands.iter().map(|o| self.lookup(o, span)).collect();
                self.gate(gate, operands, &decls, span);

                let mut ctl_seen = HashSet::new();
                for c in controls {
                    if !ctl_seen.insert(c.var.as_str()) {
                        self.report(span, format!("duplicate control {}", c.var));
                    }
                    if operands.contains(&c.var) {
                        self.report(span, format!("control {} is also an operand", c.var));
                    }
                    if let Some(d) = self.lookup(&c.var, span) {
                        if d.kind != VarKind::Qubit {
                            self.report(span, format!("control {} must be a qubit", c.var));
                        }
                    }
                }
            }
        }
    }

    fn gate(&mut self, gate: &GateKind, operands: &[String], decls: &[Option<&Decl>], span: Span) {
        let name = gate.keyword();
        if let GateKind::Custom(m) = gate {
            if m.nrows() != m.ncols() {
                self.report(span, format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
                return;
            }
            if !is_power_of_two(m.nrows()) || m.nrows() < 2 {
                self.report(span, format!("matrix size {} is not a power of two", m.nrows()));
                return;
            }
            let dev = check_unitary(m).unwrap_or(f64::INFINITY);
            if dev > UNITARY_TOL {
                self.report(span, format!("matrix is not unitary (deviation {dev:.3e})"));
            }
        }
        if gate.is_register_gate() {
            if operands.len() != 1 {
                self.report(span, format!("{name} expects 1 operand, found {}", operands.len()));
            }
            for (op, d) in operands.iter().zip(decls) {
                if matches!(d, Some(d) if d.kind != VarKind::Uint) {
                    self.report(span, format!("{name} acts on a uint register but {op} is a qubit"));
                }
            }
            return;
        }
        let arity = gate.qubit_arity().unwrap_or(0);
        if operands.len() != arity {
            self.report(span, format!("{name} expects {arity} operand(s), found {}", operands.len()));
        }
        for (op, d) in operands.iter().zip(decls) {
            if let Some(d) = d {
                if d.kind != VarKind::Qubit {
                    self.report(span, format!("{name} acts on qubits but {op} is uint<{}>", d.width));
                }
            }
        }
    }
}
