//! Surface language: lexing, parsing, validation, pretty-printing and
//! lowering to the core form.
//!
//! ```text
//! file   := decl* stmt+
//! decl   := ("qubit" IDENT | "uint" "<" INT ">" IDENT) ("=" INT)? ";"
//! stmt   := "skip" ";" | gate IDENT+ ";" | ("ctrl" | "nctrl") IDENT block
//!         | "if" guard block | "while" ("<" INT ">")? guard block
//! block  := "{" stmt+ "}"
//! guard  := IDENT | "(" IDENT ">" "0" ")" | "(" IDENT "==" INT ")"
//! gate   := "x" | "h" | "z" | "cx" | "inc" | "dec" | "u" MATRIX
//! ```
//!
//! `#` starts a comment. Matrix literals are row-major complex entries such
//! as `u[[0.6+0i, 0.8i], [0.8i, 0.6]]`.

mod ast;
mod desugar;
mod lexer;
mod parser;
mod pretty;
mod validate;

use std::fmt;

use thiserror::Error;

pub use ast::{Control, Decl, Guard, Program, Span, Stmt, VarKind};
pub use desugar::{desugar, CoreControl, CoreProgram, CoreStmt, DesugarError, GateOp, SlotId};
pub use parser::{parse_syntax, KEYWORDS};
pub use pretty::{pretty, pretty_decl, pretty_guard, pretty_stmt};
pub use validate::{validate, Diagnostic, MAX_WIDTH};

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(span: Span, message: impl Into<String>) -> Self {
        SyntaxError { line: span.line, col: span.col, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{}", DiagList(.0))]
    Invalid(Vec<Diagnostic>),
}

struct DiagList<'a>(&'a [Diagnostic]);

impl fmt::Display for DiagList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Parses and validates a program.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let program = parse_syntax(src)?;
    let diags = validate(&program);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(ParseError::Invalid(diags))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateKind;

    #[test]
    fn x_loop() {
        let p = parse("qubit q; while q { x q; }").unwrap();
        assert_eq!(p.body, Stmt::while_loop(Guard::Qubit("q".into()), Stmt::apply(GateKind::X, &["q"])));
    }

    #[test]
    fn smallest_program() {
        assert_eq!(parse("qubit q; skip;").unwrap().body, Stmt::Skip);
    }

    #[test]
    fn companion_program() {
        let p = parse("qubit c; uint<3> q = 2; while<5> (q > 0) { h c; ctrl c { inc q; } nctrl c { dec q; } }").unwrap();
        assert_eq!(p.decls, vec![Decl::qubit("c"), Decl::uint("q", 3, 2)]);
        let body = Stmt::seq(vec![
            Stmt::apply(GateKind::H, &["c"]),
            Stmt::apply(GateKind::Inc, &["q"]).with_control("c", true),
            Stmt::apply(GateKind::Dec, &["q"]).with_control("c", false),
        ]);
        assert_eq!(p.body, Stmt::bounded_while(5, Guard::GtZero("q".into()), body));
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse("qubit q;while q{x q;}").unwrap();
        let b = parse("qubit q;\n\n  while   q {\n x   q ;\n}\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_programs_are_errors() {
        assert!(matches!(parse("qubit q; x r;"), Err(ParseError::Invalid(d)) if d.len() == 1));
        assert!(matches!(parse("qubit q; x q"), Err(ParseError::Syntax(_))));
    }

    #[test]
    fn round_trip_companion() {
        let src = "qubit c; uint<3> q = 2; while<5> (q > 0) { h c; ctrl c { inc q; } nctrl c { dec q; } }";
        let p = parse(src).unwrap();
        assert_eq!(parse(&pretty(&p)).unwrap(), p);
    }
}
