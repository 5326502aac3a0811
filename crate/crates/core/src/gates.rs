//! Gate library, control decoration and the guard-copy primitive.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{is_power_of_two, unitarity_deviation, CMatrix, ONE, ZERO};
use crate::state::{BasisLabel, Ket};

/// Unitarity tolerance used when accepting user matrices.
pub const UNITARY_TOL: f64 = 1e-9;

/// Largest register width for which [`matrix_of`] materialises `Inc`/`Dec`.
pub const MAX_MATRIX_WIDTH: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("register gate needs a width")]
    MissingWidth,
    #[error("register width {0} is too large to materialise")]
    WidthTooLarge(u32),
    #[error("ancilla indices start at 1")]
    AncillaZero,
    #[error("qubit {0} appears more than once among targets and controls")]
    Overlap(Qubit),
}

/// One qubit coordinate of the program space: an ancilla `t_i` (1-based) or a
/// bit of a declared register (little-endian bit index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qubit {
    Ancilla(usize),
    Reg { reg: usize, bit: u32 },
}

impl Qubit {
    pub fn reg(reg: usize) -> Self {
        Qubit::Reg { reg, bit: 0 }
    }

    pub fn read(&self, label: &BasisLabel) -> bool {
        match *self {
            Qubit::Ancilla(i) => label.ancilla(i),
            Qubit::Reg { reg, bit } => label.reg(reg) >> bit & 1 == 1,
        }
    }

    pub fn write(&self, label: &mut BasisLabel, value: bool) {
        match *self {
            Qubit::Ancilla(i) => label.set_ancilla(i, value),
            Qubit::Reg { reg, bit } => {
                let v = label.reg(reg);
                let mask = 1u64 << bit;
                label.set_reg(reg, if value { v | mask } else { v & !mask });
            }
        }
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qubit::Ancilla(i) => write!(f, "t{i}"),
            Qubit::Reg { reg, bit } => write!(f, "r{reg}[{bit}]"),
        }
    }
}

/// Positive and negative controls. A branch is acted on only when every
/// positive control reads 1 and every negative control reads 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ControlSpec {
    pub positive: Vec<Qubit>,
    pub negative: Vec<Qubit>,
}

impl ControlSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(positive: Vec<Qubit>, negative: Vec<Qubit>) -> Result<Self, GateError> {
        let spec = ControlSpec { positive, negative };
        spec.check_disjoint(&[])?;
        Ok(spec)
    }

    pub fn positive(qubits: impl IntoIterator<Item = Qubit>) -> Self {
        ControlSpec { positive: qubits.into_iter().collect(), negative: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    /// Errors when any coordinate repeats across controls and `targets`.
    pub fn check_disjoint(&self, targets: &[Qubit]) -> Result<(), GateError> {
        let mut seen = std::collections::HashSet::new();
        for q in self.positive.iter().chain(&self.negative).chain(targets) {
            if !seen.insert(*q) {
                return Err(GateError::Overlap(*q));
            }
        }
        Ok(())
    }

    pub(crate) fn compile(&self) -> CompiledControls {
        let mut c = CompiledControls::default();
        for q in &self.positive {
            match *q {
                Qubit::Ancilla(i) => set_mask_bit(&mut c.anc_pos, i),
                Qubit::Reg { reg, bit } => c.reg_pos.push((reg, bit)),
            }
        }
        for q in &self.negative {
            match *q {
                Qubit::Ancilla(i) => set_mask_bit(&mut c.anc_neg, i),
                Qubit::Reg { reg, bit } => c.reg_neg.push((reg, bit)),
            }
        }
        c
    }

    pub fn holds(&self, label: &BasisLabel) -> bool {
        self.compile().holds(label)
    }
}

fn set_mask_bit(mask: &mut Vec<u64>, i: usize) {
    let (w, b) = BasisLabel::ancilla_slot(i);
    if mask.len() <= w {
        mask.resize(w + 1, 0);
    }
    mask[w] |= b;
}

/// Word masks for fast control tests over long ancilla prefixes.
#[derive(Clone, Debug, Default)]
pub(crate) struct CompiledControls {
    anc_pos: Vec<u64>,
    anc_neg: Vec<u64>,
    reg_pos: Vec<(usize, u32)>,
    reg_neg: Vec<(usize, u32)>,
}

impl CompiledControls {
    pub(crate) fn holds(&self, label: &BasisLabel) -> bool {
        let words = label.ancilla_words();
        for (w, m) in self.anc_pos.iter().enumerate() {
            let have = words.get(w).copied().unwrap_or(0);
            if have & m != *m {
                return false;
            }
        }
        for (w, m) in self.anc_neg.iter().enumerate() {
            if words.get(w).copied().unwrap_or(0) & m != 0 {
                return false;
            }
        }
        self.reg_pos.iter().all(|&(r, b)| label.reg(r) >> b & 1 == 1)
            && self.reg_neg.iter().all(|&(r, b)| label.reg(r) >> b & 1 == 0)
    }
}

/// The gate set of the language.
#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    X,
    H,
    Z,
    CX,
    /// `|v⟩ ↦ |v+1 mod 2^w⟩` on a whole register.
    Inc,
    /// Inverse of `Inc`.
    Dec,
    Custom(CMatrix),
}

impl GateKind {
    /// Number of qubit operands, or `None` for the register gates.
    pub fn qubit_arity(&self) -> Option<usize> {
        match self {
            GateKind::X | GateKind::H | GateKind::Z => Some(1),
            GateKind::CX => Some(2),
            GateKind::Inc | GateKind::Dec => None,
            GateKind::Custom(m) => Some(m.nrows().trailing_zeros() as usize),
        }
    }

    pub fn is_register_gate(&self) -> bool {
        matches!(self, GateKind::Inc | GateKind::Dec)
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Z => "z",
            GateKind::CX => "cx",
            GateKind::Inc => "inc",
            GateKind::Dec => "dec",
            GateKind::Custom(_) => "u",
        }
    }

    /// Validates a user-supplied matrix and wraps it.
    pub fn custom(m: CMatrix) -> Result<Self, GateError> {
        validate_custom(&m)?;
        Ok(GateKind::Custom(m))
    }
}

fn validate_custom(m: &CMatrix) -> Result<(), GateError> {
    if m.nrows() != m.ncols() {
        return Err(GateError::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if !is_power_of_two(m.nrows()) || m.nrows() < 2 {
        return Err(GateError::NotPowerOfTwo(m.nrows()));
    }
    let deviation = check_unitary(m)?;
    if deviation > UNITARY_TOL {
        return Err(GateError::NotUnitary { deviation });
    }
    Ok(())
}

/// Max-entry modulus of `m† m − I`. Callers reject above [`UNITARY_TOL`].
pub fn check_unitary(m: &CMatrix) -> Result<f64, GateError> {
    unitarity_deviation(m).ok_or(GateError::NonSquare { rows: m.nrows(), cols: m.ncols() })
}

/// The unitary matrix of a gate. Register gates need the register `width`.
///
/// Multi-qubit matrices index their operands most-significant first, so for
/// `cx a b` the row index is `2·a + b`.
pub fn matrix_of(gate: &GateKind, width: Option<u32>) -> Result<CMatrix, GateError> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64| Complex64::new(re, 0.0);
    Ok(match gate {
        GateKind::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        GateKind::H => CMatrix::from_row_slice(2, 2, &[c(r), c(r), c(r), c(-r)]),
        GateKind::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0)]),
        GateKind::CX => {
            let mut m = CMatrix::zeros(4, 4);
            m[(0, 0)] = ONE;
            m[(1, 1)] = ONE;
            m[(2, 3)] = ONE;
            m[(3, 2)] = ONE;
            m
        }
        GateKind::Inc | GateKind::Dec => {
            let w = width.ok_or(GateError::MissingWidth)?;
            if w > MAX_MATRIX_WIDTH {
                return Err(GateError::WidthTooLarge(w));
            }
            let shift = RegisterShift::new(0, w, if *gate == GateKind::Inc { 1 } else { -1 });
            let d = 1usize << w;
            let mut m = CMatrix::zeros(d, d);
            for v in 0..d as u64 {
                m[(shift.map(v) as usize, v as usize)] = ONE;
            }
            m
        }
        GateKind::Custom(m) => {
            validate_custom(m)?;
            m.clone()
        }
    })
}

/// Cyclic addition of `delta` modulo `2^width` on register `reg`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterShift {
    pub reg: usize,
    pub width: u32,
    pub delta: i64,
}

impl RegisterShift {
    pub fn new(reg: usize, width: u32, delta: i64) -> Self {
        RegisterShift { reg, width, delta }
    }

    pub fn map(&self, v: u64) -> u64 {
        let modulus = 1i128 << self.width;
        (v as i128 + self.delta as i128).rem_euclid(modulus) as u64
    }

    pub fn apply(&self, ket: &Ket, controls: &ControlSpec) -> Ket {
        let compiled = controls.compile();
        ket.map_labels(|label| {
            if compiled.holds(label) {
                let mut out = label.clone();
                out.set_reg(self.reg, self.map(label.reg(self.reg)));
                out
            } else {
                label.clone()
            }
        })
    }
}

/// Predicate whose truth value a guard copy writes into an ancilla.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardTest {
    /// The register is a single qubit and reads 1.
    Qubit,
    /// The register value is nonzero.
    NonZero,
    /// The register value equals the constant.
    Equals(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GuardPredicate {
    pub reg: usize,
    pub test: GuardTest,
}

impl GuardPredicate {
    pub fn qubit(reg: usize) -> Self {
        GuardPredicate { reg, test: GuardTest::Qubit }
    }

    pub fn holds(&self, label: &BasisLabel) -> bool {
        let v = label.reg(self.reg);
        match self.test {
            GuardTest::Qubit => v & 1 == 1,
            GuardTest::NonZero => v != 0,
            GuardTest::Equals(c) => v == c,
        }
    }
}

/// `|t_n⟩|v⟩ ↦ |t_n ⊕ [guard(v)]⟩|v⟩`, optionally controlled.
///
/// For a qubit guard this is `CNOT(q → t_n)`. It is an involution.
#[derive(Clone, Debug, PartialEq)]
pub struct GuardFlip {
    pub guard: GuardPredicate,
    pub ancilla: usize,
    pub controls: ControlSpec,
}

impl GuardFlip {
    pub fn controlled(mut self, controls: ControlSpec) -> Self {
        self.controls = controls;
        self
    }

    pub fn apply(&self, ket: &Ket) -> Ket {
        let compiled = self.controls.compile();
        ket.map_labels(|label| {
            let mut out = label.clone();
            if compiled.holds(label) && self.guard.holds(label) {
                out.flip_ancilla(self.ancilla);
            }
            out
        })
    }
}

pub fn guard_flip(guard: GuardPredicate, ancilla: usize) -> Result<GuardFlip, GateError> {
    if ancilla == 0 {
        return Err(GateError::AncillaZero);
    }
    Ok(GuardFlip { guard, ancilla, controls: ControlSpec::none() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::BasisLabel;

    fn amp(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hadamard_matrix() {
        let h = matrix_of(&GateKind::H, None).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(h[(0, 0)], amp(r));
        assert_eq!(h[(1, 1)], amp(-r));
        assert!(check_unitary(&h).unwrap() <= 1e-15);
    }

    #[test]
    fn inc_wraps_modulo_width() {
        let inc = matrix_of(&GateKind::Inc, Some(2)).unwrap();
        // Column 3 (|3⟩) maps to row 0 (|0⟩).
        assert_eq!(inc[(0, 3)], ONE);
        assert_eq!(inc[(1, 0)], ONE);
    }

    #[test]
    fn dec_inverts_inc() {
        let inc = matrix_of(&GateKind::Inc, Some(3)).unwrap();
        let dec = matrix_of(&GateKind::Dec, Some(3)).unwrap();
        assert_eq!(dec * inc, CMatrix::identity(8, 8));
    }

    #[test]
    fn every_library_gate_is_unitary() {
        for g in [GateKind::X, GateKind::H, GateKind::Z, GateKind::CX] {
            assert!(check_unitary(&matrix_of(&g, None).unwrap()).unwrap() <= 1e-12);
        }
        for w in 1..=5 {
            for g in [GateKind::Inc, GateKind::Dec] {
                assert!(check_unitary(&matrix_of(&g, Some(w)).unwrap()).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn register_gate_without_width() {
        assert_eq!(matrix_of(&GateKind::Inc, None), Err(GateError::MissingWidth));
    }

    #[test]
    fn custom_rejects_projector() {
        let p = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        assert!(matches!(GateKind::custom(p), Err(GateError::NotUnitary { .. })));
        let odd = CMatrix::identity(3, 3);
        assert_eq!(GateKind::custom(odd), Err(GateError::NotPowerOfTwo(3)));
        assert!(matches!(check_unitary(&CMatrix::zeros(2, 3)), Err(GateError::NonSquare { .. })));
    }

    #[test]
    fn check_unitary_values() {
        assert_eq!(check_unitary(&CMatrix::identity(2, 2)).unwrap(), 0.0);
        let p = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(check_unitary(&p).unwrap(), 1.0);
    }

    #[test]
    fn guard_flip_on_qubit_superposition() {
        // (α|0⟩ + β|1⟩)_q |0⟩_t1 → α|0⟩|0⟩ + β|1⟩|1⟩
        let (a, b) = (amp(0.6), amp(0.8));
        let ket = Ket::from_terms([(BasisLabel::new(vec![0]), a), (BasisLabel::new(vec![1]), b)]);
        let out = guard_flip(GuardPredicate::qubit(0), 1).unwrap().apply(&ket);
        let mut flipped = BasisLabel::new(vec![1]);
        flipped.set_ancilla(1, true);
        assert_eq!(out.amplitude(&BasisLabel::new(vec![0])), a);
        assert_eq!(out.amplitude(&flipped), b);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn guard_flip_greater_than_zero() {
        let gt = GuardPredicate { reg: 0, test: GuardTest::NonZero };
        let flip = guard_flip(gt, 1).unwrap();
        let out = flip.apply(&Ket::basis(BasisLabel::new(vec![2])));
        let mut expect = BasisLabel::new(vec![2]);
        expect.set_ancilla(1, true);
        assert_eq!(out.amplitude(&expect), ONE);

        let zero = Ket::basis(BasisLabel::new(vec![0]));
        assert_eq!(flip.apply(&zero), zero);
    }

    #[test]
    fn guard_flip_rejects_ancilla_zero() {
        assert_eq!(guard_flip(GuardPredicate::qubit(0), 0), Err(GateError::AncillaZero));
    }

    #[test]
    fn controls_must_be_disjoint() {
        let q = Qubit::reg(0);
        assert_eq!(ControlSpec::new(vec![q], vec![q]), Err(GateError::Overlap(q)));
    }
}
