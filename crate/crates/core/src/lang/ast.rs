use std::fmt;

use crate::gates::GateKind;

/// Source position. Compares equal to every other span so that ASTs built
/// by hand and ASTs produced by the parser are structurally comparable.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Qubit,
    Uint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub kind: VarKind,
    /// Bits; 1 for a qubit.
    pub width: u32,
    /// Classical basis value the register starts in.
    pub init: u64,
    pub span: Span,
}

impl Decl {
    pub fn qubit(name: &str) -> Self {
        Decl { name: name.into(), kind: VarKind::Qubit, width: 1, init: 0, span: Span::default() }
    }

    pub fn uint(name: &str, width: u32, init: u64) -> Self {
        Decl { name: name.into(), kind: VarKind::Uint, width, init, span: Span::default() }
    }
}

/// The predicate copied into a fresh ancilla by a loop iteration or an `if`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Guard {
    Qubit(String),
    GtZero(String),
    EqConst(String, u64),
}

impl Guard {
    pub fn var(&self) -> &str {
        match self {
            Guard::Qubit(v) | Guard::GtZero(v) | Guard::EqConst(v, _) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Control {
    pub var: String,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Skip,
    Apply { gate: GateKind, operands: Vec<String>, controls: Vec<Control>, span: Span },
    Seq(Box<Stmt>, Box<Stmt>),
    While { guard: Guard, body: Box<Stmt>, span: Span },
    BoundedWhile { bound: usize, guard: Guard, body: Box<Stmt>, span: Span },
    If { guard: Guard, body: Box<Stmt>, span: Span },
}

impl Stmt {
    pub fn apply(gate: GateKind, operands: &[&str]) -> Stmt {
        Stmt::Apply {
            gate,
            operands: operands.iter().map(|s| s.to_string()).collect(),
            controls: Vec::new(),
            span: Span::default(),
        }
    }

    /// Adds a control outside any existing ones. Only meaningful on `Apply`.
    pub fn with_control(mut self, var: &str, positive: bool) -> Stmt {
        if let Stmt::Apply { controls, .. } = &mut self {
            controls.insert(0, Control { var: var.into(), positive });
        }
        self
    }

    pub fn while_loop(guard: Guard, body: Stmt) -> Stmt {
        Stmt::While { guard, body: Box::new(body), span: Span::default() }
    }

    pub fn bounded_while(bound: usize, guard: Guard, body: Stmt) -> Stmt {
        Stmt::BoundedWhile { bound, guard, body: Box::new(body), span: Span::default() }
    }

    pub fn if_then(guard: Guard, body: Stmt) -> Stmt {
        Stmt::If { guard, body: Box::new(body), span: Span::default() }
    }

    /// Right-nested sequence; the shape the parser produces.
    pub fn seq(mut stmts: Vec<Stmt>) -> Stmt {
        let mut acc = stmts.pop().unwrap_or(Stmt::Skip);
        while let Some(s) = stmts.pop() {
            acc = Stmt::Seq(Box::new(s), Box::new(acc));
        }
        acc
    }

    /// Flattens nested `Seq` nodes into source order.
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        fn walk<'a>(s: &'a Stmt, out: &mut Vec<&'a Stmt>) {
            match s {
                Stmt::Seq(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn contains_loop(&self) -> bool {
        match self {
            Stmt::While { .. } | Stmt::BoundedWhile { .. } => true,
            Stmt::Seq(a, b) => a.contains_loop() || b.contains_loop(),
            Stmt::If { body, .. } => body.contains_loop(),
            Stmt::Skip | Stmt::Apply { .. } => false,
        }
    }

    pub fn contains_unbounded_loop(&self) -> bool {
        match self {
            Stmt::While { .. } => true,
            Stmt::BoundedWhile { body, .. } | Stmt::If { body, .. } => body.contains_unbounded_loop(),
            Stmt::Seq(a, b) => a.contains_unbounded_loop() || b.contains_unbounded_loop(),
            Stmt::Skip | Stmt::Apply { .. } => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub body: Stmt,
}
