//! Dense operators on a truncated program space, built from basis-index
//! arithmetic only.

use thiserror::Error;

use crate::gates::{ControlSpec, GateError, GuardPredicate, GuardTest, Qubit};
use crate::lang::{CoreControl, CoreStmt, GateOp};
use crate::linalg::{CMatrix, CVector, ONE, ZERO};
use crate::semantics::EvalError;
use crate::state::{BasisLabel, Ket, RegisterLayout};

/// Largest dimension the oracle will build.
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension 2^{0} exceeds the oracle cap of {MAX_DIM}")]
    TooLarge(u32),
    #[error("the oracle only handles single-qubit guards")]
    NotQubitGuard,
    #[error("{n} iterations need {n} ancillas but the space has {ancillas}")]
    TooFewAncillas { n: usize, ancillas: usize },
    #[error("loops have no dense form here; use dense_w / dense_l")]
    HasLoop,
    #[error("the body allocates ancillas, which would collide with loop ancillas")]
    BodyAllocates,
    #[error("state touches ancilla t{0}, outside the truncated space")]
    OutsideSpace(usize),
    #[error("vector length {got} does not match dimension {want}")]
    Length { got: usize, want: usize },
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `a` ancillas followed by registers of the given widths. Index bits run
/// `t_1` (most significant) … `t_a`, then each register most significant bit
/// first, which is the order of [`BasisLabel`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceSpec {
    pub ancillas: usize,
    pub widths: Vec<u32>,
}

impl SpaceSpec {
    pub fn new(ancillas: usize, widths: Vec<u32>) -> Result<Self, OracleError> {
        let bits = ancillas as u32 + widths.iter().sum::<u32>();
        if bits > MAX_DIM.trailing_zeros() {
            return Err(OracleError::TooLarge(bits));
        }
        Ok(SpaceSpec { ancillas, widths })
    }

    pub fn for_layout(ancillas: usize, layout: &RegisterLayout) -> Result<Self, OracleError> {
        SpaceSpec::new(ancillas, layout.regs.iter().map(|r| r.width).collect())
    }

    fn reg_bits(&self) -> u32 {
        self.widths.iter().sum()
    }

    pub fn dim(&self) -> usize {
        1 << (self.ancillas as u32 + self.reg_bits())
    }

    /// Shift of the lowest bit of register `r` within an index.
    fn reg_shift(&self, r: usize) -> u32 {
        self.widths[r + 1..].iter().sum()
    }

    /// Bit position of a qubit within an index.
    pub fn bit_of(&self, q: Qubit) -> u32 {
        match q {
            Qubit::Ancilla(i) => {
                debug_assert!(i >= 1 && i <= self.ancillas);
                self.reg_bits() + (self.ancillas - i) as u32
            }
            Qubit::Reg { reg, bit } => self.reg_shift(reg) + bit,
        }
    }

    pub fn reg_value(&self, idx: usize, r: usize) -> u64 {
        ((idx >> self.reg_shift(r)) as u64) & ((1u64 << self.widths[r]) - 1)
    }

    fn with_reg_value(&self, idx: usize, r: usize, v: u64) -> usize {
        let shift = self.reg_shift(r);
        let mask = ((1usize << self.widths[r]) - 1) << shift;
        (idx & !mask) | ((v as usize) << shift)
    }

    pub fn index_of(&self, label: &BasisLabel) -> Result<usize, OracleError> {
        if label.ancilla_len() > self.ancillas {
            return Err(OracleError::OutsideSpace(label.ancilla_len()));
        }
        let mut idx = 0usize;
        for i in 1..=self.ancillas {
            if label.ancilla(i) {
                idx |= 1 << self.bit_of(Qubit::Ancilla(i));
            }
        }
        for r in 0..self.widths.len() {
            idx = self.with_reg_value(idx, r, label.reg(r));
        }
        Ok(idx)
    }

    pub fn label_of(&self, idx: usize) -> BasisLabel {
        let mut label = BasisLabel::new((0..self.widths.len()).map(|r| self.reg_value(idx, r)).collect());
        for i in 1..=self.ancillas {
            if idx >> self.bit_of(Qubit::Ancilla(i)) & 1 == 1 {
                label.set_ancilla(i, true);
            }
        }
        label
    }

    pub fn ket_to_vector(&self, ket: &Ket) -> Result<CVector, OracleError> {
        let mut v = CVector::zeros(self.dim());
        for (l, a) in ket.iter() {
            v[self.index_of(l)?] += a;
        }
        Ok(v)
    }

    pub fn vector_to_ket(&self, v: &CVector) -> Result<Ket, OracleError> {
        if v.len() != self.dim() {
            return Err(OracleError::Length { got: v.len(), want: self.dim() });
        }
        Ok(Ket::from_terms(v.iter().enumerate().filter(|(_, a)| **a != ZERO).map(|(i, a)| (self.label_of(i), *a))))
    }

    fn holds(&self, controls: &ControlSpec, idx: usize) -> bool {
        controls.positive.iter().all(|q| idx >> self.bit_of(*q) & 1 == 1)
            && controls.negative.iter().all(|q| idx >> self.bit_of(*q) & 1 == 0)
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dim(), self.dim())
    }

    pub fn zero(&self) -> CMatrix {
        CMatrix::zeros(self.dim(), self.dim())
    }

    /// Matrix of the basis map `f`, which must be a bijection.
    pub fn permutation(&self, f: impl Fn(usize) -> usize) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            m[(f(j), j)] = ONE;
        }
        m
    }

    /// `m` on `targets` (first target most significant), identity elsewhere,
    /// applied only where `controls` hold.
    pub fn extend(&self, m: &CMatrix, targets: &[Qubit], controls: &ControlSpec) -> CMatrix {
        let d = self.dim();
        let bits: Vec<u32> = targets.iter().map(|q| self.bit_of(*q)).collect();
        let r = bits.len();
        let mut out = CMatrix::zeros(d, d);
        for col in 0..d {
            if !self.holds(controls, col) {
                out[(col, col)] = ONE;
                continue;
            }
            let local_in = bits.iter().fold(0usize, |acc, &b| acc << 1 | (col >> b & 1));
            let base = bits.iter().fold(col, |acc, &b| acc & !(1 << b));
            for local_out in 0..1usize << r {
                let mut row = base;
                for (k, &b) in bits.iter().enumerate() {
                    if local_out >> (r - 1 - k) & 1 == 1 {
                        row |= 1 << b;
                    }
                }
                out[(row, col)] = m[(local_out, local_in)];
            }
        }
        out
    }

    /// `G(q, n)`: flips `t_n` where the guard holds.
    pub fn guard_copy(&self, guard: &GuardPredicate, n: usize, controls: &ControlSpec) -> CMatrix {
        let t = 1usize << self.bit_of(Qubit::Ancilla(n));
        self.permutation(|idx| {
            if self.holds(controls, idx) && guard_holds(self, guard, idx) {
                idx ^ t
            } else {
                idx
            }
        })
    }

    /// `P_{b, t_i}`.
    pub fn projector(&self, i: usize, bit: bool) -> CMatrix {
        let b = self.bit_of(Qubit::Ancilla(i));
        let d = self.dim();
        CMatrix::from_diagonal(&CVector::from_fn(d, |idx, _| if (idx >> b & 1 == 1) == bit { ONE } else { ZERO }))
    }

    /// `P_{1^n}`, the still-running projector.
    pub fn running_projector(&self, n: usize) -> CMatrix {
        (1..=n).fold(self.identity(), |acc, i| acc * self.projector(i, true))
    }

    /// Basis permutation sending `t_i` to `t_{i+1}` and `t_a` to `t_1`.
    pub fn tape_rotation(&self) -> CMatrix {
        let a = self.ancillas;
        if a == 0 {
            return self.identity();
        }
        let low = self.reg_bits();
        self.permutation(|idx| {
            let tape = idx >> low;
            let last = tape & 1;
            let rotated = (tape >> 1) | (last << (a - 1));
            (rotated << low) | (idx & ((1 << low) - 1))
        })
    }

    /// Conjugation by [`tape_rotation`](Self::tape_rotation). For an
    /// operator that does not touch `t_a` this relabels every `t_i` as
    /// `t_{i+1}` and leaves `t_1` free.
    pub fn shift(&self, m: &CMatrix) -> CMatrix {
        let c = self.tape_rotation();
        &c * m * c.adjoint()
    }
}

fn guard_holds(space: &SpaceSpec, guard: &GuardPredicate, idx: usize) -> bool {
    let v = space.reg_value(idx, guard.reg);
    match guard.test {
        GuardTest::Qubit => v & 1 == 1,
        GuardTest::NonZero => v != 0,
        GuardTest::Equals(c) => v == c,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    pub matrix: CMatrix,
    pub space: SpaceSpec,
}

impl DenseOperator {
    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn apply_ket(&self, ket: &Ket) -> Result<Ket, OracleError> {
        self.space.vector_to_ket(&self.apply(&self.space.ket_to_vector(ket)?))
    }
}

/// Composed matrix of a loop-free statement. Guard copies of desugared `if`s
/// take ancillas `t_1, t_2, …` in execution order.
pub fn dense_of_program(stmt: &CoreStmt, space: &SpaceSpec) -> Result<DenseOperator, OracleError> {
    let mut slots = Vec::new();
    let matrix = dense_stmt(stmt, space, &mut slots)?;
    Ok(DenseOperator { matrix, space: space.clone() })
}

fn dense_stmt(stmt: &CoreStmt, space: &SpaceSpec, slots: &mut Vec<(usize, usize)>) -> Result<CMatrix, OracleError> {
    let controls = |extra: &[CoreControl], slots: &[(usize, usize)]| {
        let mut spec = ControlSpec::none();
        for c in extra {
            match *c {
                CoreControl::Reg { reg, positive: true } => spec.positive.push(Qubit::reg(reg)),
                CoreControl::Reg { reg, positive: false } => spec.negative.push(Qubit::reg(reg)),
                CoreControl::Slot(s) => {
                    let (_, t) = *slots.iter().rev().find(|(slot, _)| *slot == s).expect("slot bound before use");
                    spec.positive.push(Qubit::Ancilla(t));
                }
            }
        }
        spec
    };
    match stmt {
        CoreStmt::Skip => Ok(space.identity()),
        CoreStmt::Seq(v) => {
            let mut acc = space.identity();
            for s in v {
                acc = dense_stmt(s, space, slots)? * acc;
            }
            Ok(acc)
        }
        CoreStmt::Apply { op, controls: extra } => {
            let spec = controls(extra, slots);
            Ok(match op {
                GateOp::Matrix { matrix, targets } => space.extend(matrix, targets, &spec),
                GateOp::Shift(shift) => space.permutation(|idx| {
                    if space.holds(&spec, idx) {
                        space.with_reg_value(idx, shift.reg, shift.map(space.reg_value(idx, shift.reg)))
                    } else {
                        idx
                    }
                }),
            })
        }
        CoreStmt::GuardCopy { guard, slot, controls: extra } => {
            let spec = controls(extra, slots);
            let t = slots.len() + 1;
            if t > space.ancillas {
                return Err(OracleError::TooFewAncillas { n: t, ancillas: space.ancillas });
            }
            slots.push((*slot, t));
            Ok(space.guard_copy(guard, t, &spec))
        }
        CoreStmt::While { .. } => Err(OracleError::HasLoop),
    }
}

/// Which construction of `w_n`/`W_n` (or `l_n`/`L_n`) to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `(P0_{t1} + P1_{t1}·Sh(w_{n-1})·S)·G(q,1)` from the base case.
    Recursive,
    /// Sum over exit iterations plus, for `W_n`, the still-running term.
    Closed,
    /// [`Variant::Closed`] with the guard-copy index in the summation off by
    /// one. Exists to show that the checks catch such a slip.
    ClosedOffByOne,
}

fn loop_inputs(n: usize, guard: &GuardPredicate, body: &CoreStmt, space: &SpaceSpec) -> Result<CMatrix, OracleError> {
    if guard.test != GuardTest::Qubit {
        return Err(OracleError::NotQubitGuard);
    }
    if n > space.ancillas {
        return Err(OracleError::TooFewAncillas { n, ancillas: space.ancillas });
    }
    if body.allocates() {
        return Err(OracleError::BodyAllocates);
    }
    Ok(dense_of_program(body, space)?.matrix)
}

fn recursive(n: usize, guard: &GuardPredicate, s: &CMatrix, space: &SpaceSpec, base: CMatrix) -> CMatrix {
    let none = ControlSpec::none();
    let g1 = space.guard_copy(guard, 1, &none);
    let p0 = space.projector(1, false);
    let p1 = space.projector(1, true);
    let mut w = base;
    for _ in 0..n {
        w = (&p0 + &p1 * space.shift(&w) * s) * &g1;
    }
    w
}

/// `∏_{i=1}^{h-1} P1_{t_i} · P0_{t_h} · ∏_{i=n-h}^{n-2} (G(q, n-i)·S) · G(q,1)`,
/// products ordered left to right.
fn exit_term(n: usize, h: usize, guard: &GuardPredicate, s: &CMatrix, space: &SpaceSpec, off_by_one: bool) -> CMatrix {
    let none = ControlSpec::none();
    let mut m = space.identity();
    for i in 1..h {
        m *= space.projector(i, true);
    }
    m *= space.projector(h, false);
    // i runs n-h ..= n-2; written with a signed bound since h = 1 is empty
    for i in (n as isize - h as isize)..=(n as isize - 2) {
        let k = (n as isize - i) as usize - usize::from(off_by_one);
        m = m * space.guard_copy(guard, k, &none) * s;
    }
    m * space.guard_copy(guard, 1, &none)
}

/// `∏_{i=1}^{n} P1_{t_i} · ∏_{i=0}^{n-1} S·G(q, n-i)`.
fn running_term(n: usize, guard: &GuardPredicate, s: &CMatrix, space: &SpaceSpec) -> CMatrix {
    let none = ControlSpec::none();
    let mut m = space.running_projector(n);
    for i in 0..n {
        m = m * s * space.guard_copy(guard, n - i, &none);
    }
    m
}

fn closed(n: usize, guard: &GuardPredicate, s: &CMatrix, space: &SpaceSpec, off_by_one: bool, with_running: bool) -> CMatrix {
    let mut total = space.zero();
    for h in 1..=n {
        total += exit_term(n, h, guard, s, space, off_by_one);
    }
    if with_running {
        total += if n == 0 { space.identity() } else { running_term(n, guard, s, space) };
    }
    total
}

/// Dense `W_n` of `while guard { body }`.
pub fn dense_w(n: usize, guard: &GuardPredicate, body: &CoreStmt, space: &SpaceSpec, variant: Variant) -> Result<DenseOperator, OracleError> {
    let s = loop_inputs(n, guard, body, space)?;
    let matrix = match variant {
        Variant::Recursive => recursive(n, guard, &s, space, space.identity()),
        Variant::Closed => closed(n, guard, &s, space, false, true),
        Variant::ClosedOffByOne => closed(n, guard, &s, space, true, true),
    };
    Ok(DenseOperator { matrix, space: space.clone() })
}

/// Dense `L_n` of `while guard { body }`.
pub fn dense_l(n: usize, guard: &GuardPredicate, body: &CoreStmt, space: &SpaceSpec, variant: Variant) -> Result<DenseOperator, OracleError> {
    let s = loop_inputs(n, guard, body, space)?;
    let matrix = match variant {
        Variant::Recursive => recursive(n, guard, &s, space, space.zero()),
        Variant::Closed => closed(n, guard, &s, space, false, false),
        Variant::ClosedOffByOne => closed(n, guard, &s, space, true, false),
    };
    Ok(DenseOperator { matrix, space: space.clone() })
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
