//! Interpreter and analysis toolkit for a measurement-free quantum while
//! language.
//!
//! Programs are evaluated under two semantics. The unitary semantics runs a
//! loop's unrolled circuit for a fixed number of iterations, copying the
//! guard into a fresh ancilla each time. The linear semantics keeps only the
//! branches that have left the loop, which yields a monotone, contractive
//! sequence of operators whose limit gives meaning to unbounded loops. The
//! [`oracle`] module rebuilds both operator families as dense matrices on
//! small truncated spaces and checks them against the sparse evaluator.

pub mod gates;
pub mod lang;
pub mod linalg;
pub mod oracle;
pub mod report;
pub mod semantics;
pub mod state;
