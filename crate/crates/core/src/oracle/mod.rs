//! Dense reference constructions on small truncated spaces.
//!
//! `w_n`, `W_n`, `l_n` and `L_n` are built as explicit matrices, both from
//! the recursive definition and from the closed sum-over-exit-iterations
//! form, and compared with each other and with the sparse evaluator.

mod dense;
mod suite;

pub use dense::{dense_l, dense_of_program, dense_w, kron, DenseOperator, OracleError, SpaceSpec, Variant, MAX_DIM};
pub use suite::{
    basis_convergence, check_suite, default_suite, library_bodies, random_state, random_unitary, PropertyResult, SuiteReport, SuiteSpec,
    SUITE_TOL,
};

#[cfg(test)]
mod tests;
