//! Small dense complex-matrix helpers shared by the gate library and the
//! dense oracle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Max-entry modulus of `m† m − I`, or `None` when `m` is not square.
pub fn unitarity_deviation(m: &CMatrix) -> Option<f64> {
    if m.nrows() != m.ncols() {
        return None;
    }
    let gram = m.adjoint() * m;
    let mut worst = 0.0f64;
    for r in 0..gram.nrows() {
        for c in 0..gram.ncols() {
            let expect = if r == c { ONE } else { ZERO };
            worst = worst.max((gram[(r, c)] - expect).norm());
        }
    }
    Some(worst)
}

/// Largest entrywise modulus of `a − b`. Panics on shape mismatch.
pub fn max_entry_deviation(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "matrix shapes differ");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator norm (largest singular value) by power iteration on `M† M`.
///
/// Stops when the Rayleigh quotient changes by less than `rel_tol`
/// relative to its magnitude, or after `max_iter` rounds.
pub fn operator_norm(m: &CMatrix, rel_tol: f64, max_iter: usize) -> f64 {
    let n = m.ncols();
    if n == 0 || m.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    // Uneven start so no eigenvector of a symmetric structure is missed.
    let mut v = CVector::from_fn(n, |i, _| Complex64::new(1.0 + (i as f64) * 1e-3, 0.5 / (1.0 + i as f64)));
    let norm = vector_norm(&v);
    v /= Complex64::new(norm, 0.0);
    let mut lambda = 0.0f64;
    for _ in 0..max_iter {
        let w = &gram * &v;
        let w_norm = vector_norm(&w);
        if w_norm == 0.0 {
            return 0.0;
        }
        let next = w_norm;
        v = w / Complex64::new(w_norm, 0.0);
        if (next - lambda).abs() <= rel_tol * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_is_unitary() {
        let id = CMatrix::identity(4, 4);
        assert_eq!(unitarity_deviation(&id), Some(0.0));
    }

    #[test]
    fn projector_is_not_unitary() {
        let p = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(unitarity_deviation(&p), Some(1.0));
    }

    #[test]
    fn non_square_has_no_deviation() {
        let m = CMatrix::zeros(2, 3);
        assert_eq!(unitarity_deviation(&m), None);
    }

    #[test]
    fn operator_norm_matches_svd() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(0.3, 0.1),
                c(0.0),
                Complex64::new(-0.2, 0.4),
                c(1.0),
                c(0.5),
                c(0.0),
                Complex64::new(0.0, -0.7),
                c(0.25),
                c(0.1),
            ],
        );
        let by_power = operator_norm(&m, 1e-14, 10_000);
        let by_svd = m.clone().svd(false, false).singular_values.max();
        assert!((by_power - by_svd).abs() < 1e-9, "{by_power} vs {by_svd}");
    }

    #[test]
    fn operator_norm_of_zero() {
        assert_eq!(operator_norm(&CMatrix::zeros(4, 4), 1e-12, 100), 0.0);
    }
}
