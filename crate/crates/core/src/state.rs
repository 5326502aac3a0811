//! Sparse vectors of the program space `H_T ⊗ H_Q`.
//!
//! The ancilla tape `t_1, t_2, …` is infinite; a [`BasisLabel`] stores only
//! the prefix up to its last set bit and every later ancilla reads 0. Tape bits
//! are packed most-significant-first into 64-bit words so that the derived
//! ordering of labels is the lexicographic order of the infinite bit strings,
//! followed by the register values in declaration order.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{ControlSpec, GateError, Qubit, UNITARY_TOL};
use crate::linalg::{CMatrix, ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("matrix of size {dim} does not match {targets} target qubit(s)")]
    TargetCount { dim: usize, targets: usize },
    #[error("invalid projector: {0}")]
    InvalidProjector(String),
    #[error("invalid state dump: {0}")]
    Dump(String),
}

/// One computational-basis vector of `H_T ⊗ H_Q`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    ancillas: Vec<u64>,
    regs: Vec<u64>,
}

impl BasisLabel {
    /// All-zero tape with the given register values.
    pub fn new(regs: Vec<u64>) -> Self {
        BasisLabel { ancillas: Vec::new(), regs }
    }

    /// Tape given as a `0`/`1` string (`t_1` first); `None` on other characters.
    pub fn from_parts(ancillas: &str, regs: Vec<u64>) -> Option<Self> {
        let mut label = BasisLabel::new(regs);
        for (i, ch) in ancillas.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => label.set_ancilla(i + 1, true),
                _ => return None,
            }
        }
        Some(label)
    }

    pub(crate) fn ancilla_slot(i: usize) -> (usize, u64) {
        debug_assert!(i >= 1, "ancillas are 1-based");
        let k = i - 1;
        (k / 64, 1u64 << (63 - k % 64))
    }

    pub(crate) fn ancilla_words(&self) -> &[u64] {
        &self.ancillas
    }

    pub fn ancilla(&self, i: usize) -> bool {
        let (w, b) = Self::ancilla_slot(i);
        self.ancillas.get(w).is_some_and(|word| word & b != 0)
    }

    pub fn set_ancilla(&mut self, i: usize, value: bool) {
        let (w, b) = Self::ancilla_slot(i);
        if value {
            if self.ancillas.len() <= w {
                self.ancillas.resize(w + 1, 0);
            }
            self.ancillas[w] |= b;
        } else if w < self.ancillas.len() {
            self.ancillas[w] &= !b;
            self.trim();
        }
    }

    pub fn flip_ancilla(&mut self, i: usize) {
        let v = self.ancilla(i);
        self.set_ancilla(i, !v);
    }

    fn trim(&mut self) {
        while self.ancillas.last() == Some(&0) {
            self.ancillas.pop();
        }
    }

    /// Index of the last set ancilla, 0 for an all-zero tape.
    pub fn ancilla_len(&self) -> usize {
        match self.ancillas.last() {
            None => 0,
            Some(&w) => (self.ancillas.len() - 1) * 64 + (64 - w.trailing_zeros() as usize),
        }
    }

    /// Canonical tape string: no trailing zeros, empty for `|0…⟩`.
    pub fn ancilla_string(&self) -> String {
        (1..=self.ancilla_len()).map(|i| if self.ancilla(i) { '1' } else { '0' }).collect()
    }

    pub fn reg(&self, r: usize) -> u64 {
        self.regs[r]
    }

    pub fn set_reg(&mut self, r: usize, v: u64) {
        self.regs[r] = v;
    }

    pub fn regs(&self) -> &[u64] {
        &self.regs
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}0…⟩", self.ancilla_string())?;
        for v in &self.regs {
            write!(f, "|{v}⟩")?;
        }
        Ok(())
    }
}

/// Names and widths of the declared registers, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegisterLayout {
    pub regs: Vec<RegisterInfo>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterInfo {
    pub name: String,
    pub width: u32,
}

impl RegisterLayout {
    pub fn new(regs: impl IntoIterator<Item = (String, u32)>) -> Self {
        RegisterLayout {
            regs: regs.into_iter().map(|(name, width)| RegisterInfo { name, width }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.regs.iter().position(|r| r.name == name)
    }

    pub fn width(&self, reg: usize) -> u32 {
        self.regs[reg].width
    }

    pub fn total_width(&self) -> u32 {
        self.regs.iter().map(|r| r.width).sum()
    }
}

/// Ancilla constraints `t_i = j`; the product of the projectors `P_{j_{t_i}}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProjectorSpec {
    constraints: Vec<(usize, bool)>,
}

impl ProjectorSpec {
    pub fn new(constraints: Vec<(usize, bool)>) -> Result<Self, StateError> {
        let mut seen = std::collections::HashSet::new();
        for &(i, _) in &constraints {
            if i == 0 {
                return Err(StateError::InvalidProjector("ancilla index 0".into()));
            }
            if !seen.insert(i) {
                return Err(StateError::InvalidProjector(format!("ancilla t{i} constrained twice")));
            }
        }
        Ok(ProjectorSpec { constraints })
    }

    pub fn constraints(&self) -> &[(usize, bool)] {
        &self.constraints
    }

    pub fn accepts(&self, label: &BasisLabel) -> bool {
        self.constraints.iter().all(|&(i, bit)| label.ancilla(i) == bit)
    }
}

/// A sparse, possibly sub-normalised vector of the program space.
///
/// Amplitudes of modulus `<= prune_eps` are never stored; with the default
/// `prune_eps = 0` only exact zeros are dropped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ket {
    terms: BTreeMap<BasisLabel, Complex64>,
    prune_eps: f64,
}

impl Ket {
    pub fn zero() -> Self {
        Ket::default()
    }

    pub fn with_prune_eps(mut self, eps: f64) -> Self {
        self.prune_eps = eps;
        self.terms.retain(|_, a| a.norm() > eps);
        self
    }

    pub fn prune_eps(&self) -> f64 {
        self.prune_eps
    }

    pub fn basis(label: BasisLabel) -> Self {
        Ket::from_terms([(label, Complex64::new(1.0, 0.0))])
    }

    /// Sums repeated labels and drops zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (BasisLabel, Complex64)>) -> Self {
        let mut ket = Ket::zero();
        for (l, a) in terms {
            ket.accumulate(l, a);
        }
        ket.prune();
        ket
    }

    fn empty_like(&self) -> Self {
        Ket { terms: BTreeMap::new(), prune_eps: self.prune_eps }
    }

    fn accumulate(&mut self, label: BasisLabel, amp: Complex64) {
        *self.terms.entry(label).or_insert(ZERO) += amp;
    }

    fn prune(&mut self) {
        let eps = self.prune_eps;
        self.terms.retain(|_, a| a.norm() > eps);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (lexicographic) order.
    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Complex64 {
        self.terms.get(label).copied().unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).fold(0.0, |acc, x| acc + x)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = ZERO;
        for (l, a) in &small.terms {
            if let Some(b) = large.terms.get(l) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        acc
    }

    /// `alpha·self + other`.
    pub fn add_scaled(&self, alpha: Complex64, other: &Ket) -> Ket {
        add_scaled(alpha, self, other)
    }

    pub fn scale(&self, alpha: Complex64) -> Ket {
        let mut out = self.empty_like();
        for (l, a) in &self.terms {
            out.terms.insert(l.clone(), a * alpha);
        }
        out.prune();
        out
    }

    pub fn project(&self, p: &ProjectorSpec) -> Ket {
        self.filter(|l| p.accepts(l))
    }

    pub fn filter(&self, keep: impl Fn(&BasisLabel) -> bool) -> Ket {
        let mut out = self.empty_like();
        for (l, a) in &self.terms {
            if keep(l) {
                out.terms.insert(l.clone(), *a);
            }
        }
        out
    }

    /// Splits into (terms satisfying `pred`, the rest).
    pub fn split(self, pred: impl Fn(&BasisLabel) -> bool) -> (Ket, Ket) {
        let mut yes = self.empty_like();
        let mut no = self.empty_like();
        for (l, a) in self.terms {
            if pred(&l) {
                yes.terms.insert(l, a);
            } else {
                no.terms.insert(l, a);
            }
        }
        (yes, no)
    }

    /// Adds `other` into `self` in place.
    pub fn absorb(&mut self, other: Ket) {
        let eps = self.prune_eps;
        for (l, a) in other.terms {
            match self.terms.entry(l) {
                Entry::Vacant(e) => {
                    if a.norm() > eps {
                        e.insert(a);
                    }
                }
                Entry::Occupied(mut e) => {
                    *e.get_mut() += a;
                    if e.get().norm() <= eps {
                        e.remove();
                    }
                }
            }
        }
    }

    /// Relabels every term. `f` must be injective on the stored labels for
    /// the result to be the image under a basis permutation.
    pub fn map_labels(&self, f: impl Fn(&BasisLabel) -> BasisLabel) -> Ket {
        let mut out = self.empty_like();
        for (l, a) in &self.terms {
            out.accumulate(f(l), *a);
        }
        out.prune();
        out
    }

    /// Applies the `2^r × 2^r` unitary `m` to `targets` (first target is the
    /// most significant bit of the matrix index) on every branch where the
    /// controls hold; other branches are unchanged.
    pub fn apply_local(&self, m: &CMatrix, targets: &[Qubit], controls: &ControlSpec) -> Result<Ket, StateError> {
        let r = targets.len();
        if m.nrows() != m.ncols() || m.nrows() != 1usize << r {
            return Err(StateError::TargetCount { dim: m.nrows(), targets: r });
        }
        let deviation = crate::gates::check_unitary(m)?;
        if deviation > UNITARY_TOL {
            return Err(GateError::NotUnitary { deviation }.into());
        }
        controls.check_disjoint(targets)?;
        let compiled = controls.compile();
        let dim = 1usize << r;

        let mut out = self.empty_like();
        let mut groups: BTreeMap<BasisLabel, Vec<Complex64>> = BTreeMap::new();
        for (label, amp) in &self.terms {
            if !compiled.holds(label) {
                out.terms.insert(label.clone(), *amp);
                continue;
            }
            let mut base = label.clone();
            let mut idx = 0usize;
            for (j, q) in targets.iter().enumerate() {
                if q.read(label) {
                    idx |= 1 << (r - 1 - j);
                }
                q.write(&mut base, false);
            }
            groups.entry(base).or_insert_with(|| vec![ZERO; dim])[idx] += amp;
        }
        for (base, input) in groups {
            for row in 0..dim {
                let mut acc = ZERO;
                for (col, a) in input.iter().enumerate() {
                    if *a != ZERO {
                        acc += m[(row, col)] * a;
                    }
                }
                if acc.norm() > self.prune_eps {
                    let mut label = base.clone();
                    for (j, q) in targets.iter().enumerate() {
                        q.write(&mut label, row >> (r - 1 - j) & 1 == 1);
                    }
                    out.accumulate(label, acc);
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Largest ancilla index set in any term.
    pub fn max_ancilla(&self) -> usize {
        self.terms.keys().map(BasisLabel::ancilla_len).max().unwrap_or(0)
    }

    /// JSON-ready dump, sorted by (ancillas, regs).
    pub fn dump(&self, layout: &RegisterLayout) -> Vec<StateEntry> {
        self.terms
            .iter()
            .map(|(l, a)| StateEntry {
                ancillas: l.ancilla_string(),
                regs: layout.regs.iter().zip(l.regs()).map(|(info, v)| (info.name.clone(), *v)).collect(),
                re: a.re,
                im: a.im,
            })
            .collect()
    }

    pub fn from_dump(entries: &[StateEntry], layout: &RegisterLayout) -> Result<Ket, StateError> {
        let mut terms = Vec::with_capacity(entries.len());
        for e in entries {
            let mut regs = Vec::with_capacity(layout.len());
            for info in &layout.regs {
                let v = *e
                    .regs
                    .get(&info.name)
                    .ok_or_else(|| StateError::Dump(format!("missing register {}", info.name)))?;
                if info.width < 64 && v >> info.width != 0 {
                    return Err(StateError::Dump(format!("value {v} too wide for {}", info.name)));
                }
                regs.push(v);
            }
            let label = BasisLabel::from_parts(&e.ancillas, regs)
                .ok_or_else(|| StateError::Dump(format!("bad tape string {:?}", e.ancillas)))?;
            terms.push((label, Complex64::new(e.re, e.im)));
        }
        Ok(Ket::from_terms(terms))
    }
}

/// `alpha·a + b`, pruned and canonical.
pub fn add_scaled(alpha: Complex64, a: &Ket, b: &Ket) -> Ket {
    let mut out = b.clone();
    for (l, amp) in &a.terms {
        out.accumulate(l.clone(), alpha * amp);
    }
    out.prune();
    out
}

/// One entry of the JSON state dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub ancillas: String,
    pub regs: IndexMap<String, u64>,
    pub re: f64,
    pub im: f64,
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (i, (l, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, l)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{matrix_of, GateKind};
    use std::f64::consts::FRAC_1_SQRT_2 as R;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lbl(tape: &str, q: u64) -> BasisLabel {
        BasisLabel::from_parts(tape, vec![q]).unwrap()
    }

    fn x_loop_result() -> Ket {
        Ket::from_terms([(lbl("", 0), c(R)), (lbl("1", 0), c(R))])
    }

    #[test]
    fn label_ordering_is_tape_lexicographic() {
        let mut labels = [lbl("1", 0), lbl("", 1), lbl("01", 0), lbl("11", 0), lbl("", 0)];
        labels.sort();
        let tapes: Vec<_> = labels.iter().map(|l| (l.ancilla_string(), l.reg(0))).collect();
        assert_eq!(
            tapes,
            vec![("".into(), 0), ("".into(), 1), ("01".into(), 0), ("1".into(), 0), ("11".into(), 0)]
        );
    }

    #[test]
    fn tape_past_one_word() {
        let mut l = BasisLabel::new(vec![]);
        l.set_ancilla(70, true);
        assert_eq!(l.ancilla_len(), 70);
        assert!(l.ancilla(70) && !l.ancilla(69));
        l.set_ancilla(70, false);
        assert_eq!(l, BasisLabel::new(vec![]));
    }

    #[test]
    fn norms() {
        assert_eq!(Ket::zero().norm(), 0.0);
        assert!((x_loop_result().norm() - 1.0).abs() < 1e-15);
        let half = Ket::from_terms([(lbl("", 0), c(R))]);
        assert!((half.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
    }

    #[test]
    fn inner_products() {
        let zero = Ket::basis(lbl("", 0));
        let one = Ket::basis(lbl("", 1));
        assert_eq!(zero.inner(&zero), c(1.0));
        assert_eq!(zero.inner(&one), ZERO);
        let a = Ket::from_terms([(lbl("", 0), Complex64::new(0.0, 1.0))]);
        // Conjugate-linear in the first argument.
        assert_eq!(a.inner(&zero), Complex64::new(0.0, -1.0));
        assert_eq!(zero.inner(&a), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn add_scaled_identities() {
        let x = x_loop_result();
        assert_eq!(add_scaled(c(1.0), &x, &Ket::zero()), x);
        assert!(add_scaled(c(-1.0), &x, &x).is_empty());
    }

    #[test]
    fn projector_examples() {
        let k = x_loop_result();
        let p = ProjectorSpec::new(vec![(1, false)]).unwrap();
        assert_eq!(k.project(&p), Ket::from_terms([(lbl("", 0), c(R))]));
        assert_eq!(k.project(&ProjectorSpec::default()), k);
        assert!(ProjectorSpec::new(vec![(1, true), (1, false)]).is_err());
        assert!(ProjectorSpec::new(vec![(0, true)]).is_err());
    }

    #[test]
    fn hadamard_on_zero() {
        let h = matrix_of(&GateKind::H, None).unwrap();
        let out = Ket::basis(lbl("", 0)).apply_local(&h, &[Qubit::reg(0)], &ControlSpec::none()).unwrap();
        assert_eq!(out, Ket::from_terms([(lbl("", 0), c(R)), (lbl("", 1), c(R))]));
    }

    #[test]
    fn failing_control_leaves_state() {
        let x = matrix_of(&GateKind::X, None).unwrap();
        let k = Ket::basis(lbl("", 1));
        let ctl = ControlSpec::positive([Qubit::Ancilla(1)]);
        assert_eq!(k.apply_local(&x, &[Qubit::reg(0)], &ctl).unwrap(), k);
    }

    #[test]
    fn cnot_into_ancilla() {
        // CNOT(q → t1) on (α|0⟩ + β|1⟩)_q with t1 = 0.
        let x = matrix_of(&GateKind::X, None).unwrap();
        let (a, b) = (c(0.6), c(0.8));
        let k = Ket::from_terms([(lbl("", 0), a), (lbl("", 1), b)]);
        let ctl = ControlSpec::positive([Qubit::reg(0)]);
        let out = k.apply_local(&x, &[Qubit::Ancilla(1)], &ctl).unwrap();
        assert_eq!(out, Ket::from_terms([(lbl("", 0), a), (lbl("1", 1), b)]));
    }

    #[test]
    fn apply_local_errors() {
        let x = matrix_of(&GateKind::X, None).unwrap();
        let k = Ket::basis(lbl("", 0));
        let q = Qubit::reg(0);
        assert!(matches!(
            k.apply_local(&x, &[q], &ControlSpec::positive([q])),
            Err(StateError::Gate(GateError::Overlap(_)))
        ));
        let p = CMatrix::from_row_slice(2, 2, &[c(1.0), ZERO, ZERO, ZERO]);
        assert!(matches!(
            k.apply_local(&p, &[q], &ControlSpec::none()),
            Err(StateError::Gate(GateError::NotUnitary { .. }))
        ));
        assert!(matches!(
            k.apply_local(&x, &[q, Qubit::Ancilla(1)], &ControlSpec::none()),
            Err(StateError::TargetCount { .. })
        ));
    }

    #[test]
    fn prune_eps_drops_small_amplitudes() {
        let k = Ket::from_terms([(lbl("", 0), c(1e-12)), (lbl("", 1), c(1.0))]).with_prune_eps(1e-10);
        assert_eq!(k.len(), 1);
    }

    #[test]
    fn dump_round_trip() {
        let layout = RegisterLayout::new([("q".to_string(), 1)]);
        let k = x_loop_result();
        let dump = k.dump(&layout);
        assert_eq!(dump[0].ancillas, "");
        assert_eq!(dump[1].ancillas, "1");
        assert_eq!(Ket::from_dump(&dump, &layout).unwrap(), k);
        let json = serde_json::to_string(&dump[1]).unwrap();
        assert_eq!(json, r#"{"ancillas":"1","regs":{"q":0},"re":0.7071067811865476,"im":0.0}"#);
    }
}
