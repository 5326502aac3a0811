use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::dense::{dense_l, dense_w, kron, OracleError, SpaceSpec, Variant};
use crate::gates::{matrix_of, ControlSpec, GateKind, GuardPredicate, Qubit};
use crate::lang::{CoreProgram, CoreStmt, GateOp};
use crate::linalg::{max_entry_deviation, operator_norm, vector_norm, CMatrix, CVector};
use crate::semantics::Interpreter;
use crate::state::RegisterLayout;

pub const SUITE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub max_deviation: f64,
    pub pass: bool,
}

/// Worst deviation per property, serialised as
/// `{property: {max_deviation, pass}}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SuiteReport {
    pub properties: BTreeMap<String, PropertyResult>,
}

impl SuiteReport {
    fn record(&mut self, name: &str, deviation: f64, tol: f64) {
        let dev = if deviation.is_nan() { f64::INFINITY } else { deviation };
        let entry = self.properties.entry(name.to_string()).or_insert(PropertyResult { max_deviation: 0.0, pass: true });
        entry.max_deviation = entry.max_deviation.max(dev);
        entry.pass &= dev <= tol;
    }

    pub fn merge(&mut self, other: SuiteReport) {
        for (name, r) in other.properties {
            let entry = self.properties.entry(name).or_insert(PropertyResult { max_deviation: 0.0, pass: true });
            entry.max_deviation = entry.max_deviation.max(r.max_deviation);
            entry.pass &= r.pass;
        }
    }

    pub fn passed(&self) -> bool {
        self.properties.values().all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.get(name)
    }
}

/// One loop `while guard { body }` on a fixed truncated space.
#[derive(Clone, Debug)]
pub struct SuiteSpec {
    pub guard: GuardPredicate,
    pub body: CoreStmt,
    pub layout: RegisterLayout,
    pub ancillas: usize,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Closed-form construction compared against the recursive one.
    pub closed: Variant,
}

pub fn random_state(d: usize, rng: &mut impl Rng) -> CVector {
    let v = CVector::from_fn(d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = vector_norm(&v);
    v / Complex64::new(n, 0.0)
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CVector::from_fn(d, |i, _| {
        let x = r[(i, i)];
        if x.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x / x.norm()
        }
    });
    q * CMatrix::from_diagonal(&phases)
}

fn all_reg_qubits(space: &SpaceSpec) -> Vec<Qubit> {
    let mut out = Vec::new();
    for (reg, &w) in space.widths.iter().enumerate() {
        for bit in (0..w).rev() {
            out.push(Qubit::Reg { reg, bit });
        }
    }
    out
}

/// Runs every dense-vs-operational property for one loop.
pub fn check_suite(spec: &SuiteSpec) -> Result<SuiteReport, OracleError> {
    let space = SpaceSpec::for_layout(spec.ancillas, &spec.layout)?;
    let d = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut report = SuiteReport::default();
    let program = CoreProgram {
        layout: spec.layout.clone(),
        init: vec![0; spec.layout.regs.len()],
        body: CoreStmt::While { guard: spec.guard, body: Box::new(spec.body.clone()), bound: None },
    };
    let interp = Interpreter::new(&program);

    let mut ws = Vec::new();
    let mut ls = Vec::new();
    for n in 0..=spec.n_max {
        let w = dense_w(n, &spec.guard, &spec.body, &space, Variant::Recursive)?.matrix;
        let l = dense_l(n, &spec.guard, &spec.body, &space, Variant::Recursive)?.matrix;
        let wc = dense_w(n, &spec.guard, &spec.body, &space, spec.closed)?.matrix;
        let lc = dense_l(n, &spec.guard, &spec.body, &space, spec.closed)?.matrix;
        report.record("closed_vs_recursive_w", max_entry_deviation(&w, &wc), SUITE_TOL);
        report.record("closed_vs_recursive_l", max_entry_deviation(&l, &lc), SUITE_TOL);
        report.record("unitarity_w", max_entry_deviation(&(w.adjoint() * &w), &space.identity()), SUITE_TOL);
        report.record("boundedness_l", (operator_norm(&l, 1e-12, 10_000) - 1.0).max(0.0), SUITE_TOL);
        if n >= 1 {
            let sub = (space.identity() - space.running_projector(n)) * &w;
            report.record("sub_state", max_entry_deviation(&l, &sub), 1e-10);
        }
        ws.push(w);
        ls.push(l);
    }

    for _ in 0..spec.trials {
        let psi = random_state(d, &mut rng);
        let ket = space.vector_to_ket(&psi)?;
        let lpsi: Vec<CVector> = ls.iter().map(|l| l * &psi).collect();
        for n in 0..=spec.n_max {
            let wv = &ws[n] * &psi;
            let op_w = space.ket_to_vector(&interp.eval_unitary_n(&spec.guard, &spec.body, &ket, n)?)?;
            let op_l = space.ket_to_vector(&interp.eval_linear_n(&spec.guard, &spec.body, &ket, n)?)?;
            report.record("operational_w", vector_norm(&(op_w - &wv)), 1e-10);
            report.record("operational_l", vector_norm(&(op_l - &lpsi[n])), 1e-10);
            report.record("unitarity_w", (vector_norm(&wv) - 1.0).abs(), SUITE_TOL);
            report.record("contraction", (vector_norm(&lpsi[n]) - 1.0).max(0.0), 1e-12);
        }
        let diffs: Vec<CVector> = lpsi.windows(2).map(|p| &p[1] - &p[0]).collect();
        let mut sum = CVector::zeros(d);
        for (k, dk) in diffs.iter().enumerate() {
            for dm in &diffs[k + 1..] {
                report.record("orthogonal_increments", dk.dotc(dm).norm(), 1e-10);
            }
            sum += dk;
            report.record("telescoping", vector_norm(&(&sum - &lpsi[k + 1])), 1e-12);
            report.record("monotone_norms", (vector_norm(&lpsi[k]) - vector_norm(&lpsi[k + 1])).max(0.0), 1e-12);
        }

        // P0⊗I + P1⊗U against the projector-extended form with Ū.
        if space.ancillas >= 1 {
            let reg_dim = d >> space.ancillas;
            let u = random_unitary(reg_dim, &mut rng);
            let rest = CMatrix::identity(1 << (space.ancillas - 1), 1 << (space.ancillas - 1));
            let p0 = CMatrix::from_diagonal(&CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]));
            let p1 = CMatrix::from_diagonal(&CVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]));
            let lhs = kron(&p0, &CMatrix::identity(d / 2, d / 2)) + kron(&p1, &kron(&rest, &u));
            let none = ControlSpec::none();
            let ubar = space.extend(&u, &all_reg_qubits(&space), &none);
            let rhs = space.extend(&p0, &[Qubit::Ancilla(1)], &none) + space.extend(&p1, &[Qubit::Ancilla(1)], &none) * ubar;
            report.record("controlled_identity", max_entry_deviation(&lhs, &rhs), 1e-12);
        }
    }
    Ok(report)
}

/// For the H-loop, `‖L_n e_i − L_{n−1} e_i‖ ≤ 2^{−(n−1)/2}` on every
/// standard basis vector of the space. Returns the worst excess over the
/// bound.
pub fn basis_convergence(ancillas: usize, n_max: usize) -> Result<f64, OracleError> {
    let layout = RegisterLayout::new([("q".to_string(), 1)]);
    let space = SpaceSpec::for_layout(ancillas, &layout)?;
    let guard = GuardPredicate::qubit(0);
    let body = h_body();
    let ls: Vec<CMatrix> = (0..=n_max).map(|n| dense_l(n, &guard, &body, &space, Variant::Recursive).map(|o| o.matrix)).collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..space.dim() {
        for n in 1..=n_max {
            let inc = vector_norm(&(ls[n].column(i) - ls[n - 1].column(i)));
            worst = worst.max(inc - 2f64.powf(-((n - 1) as f64) / 2.0));
        }
    }
    Ok(worst.max(0.0))
}

fn gate_body(gate: GateKind, targets: Vec<Qubit>) -> CoreStmt {
    CoreStmt::Apply { op: GateOp::Matrix { matrix: matrix_of(&gate, None).expect("fixed gate"), targets }, controls: Vec::new() }
}

fn h_body() -> CoreStmt {
    gate_body(GateKind::H, vec![Qubit::reg(0)])
}

/// The fixed bodies of the equivalence grid, acting on register 0.
pub fn library_bodies() -> Vec<(&'static str, CoreStmt)> {
    let q = || vec![Qubit::reg(0)];
    vec![
        ("skip", CoreStmt::Skip),
        ("x", gate_body(GateKind::X, q())),
        ("h", gate_body(GateKind::H, q())),
        ("z", gate_body(GateKind::Z, q())),
        ("h;x", CoreStmt::seq(vec![gate_body(GateKind::H, q()), gate_body(GateKind::X, q())])),
    ]
}

/// Library bodies and random bodies on spaces of dimension at most 64.
pub fn default_suite(n_max: usize, trials: usize, seed: u64, closed: Variant) -> Result<SuiteReport, OracleError> {
    let mut report = SuiteReport::default();
    let one = RegisterLayout::new([("q".to_string(), 1)]);
    let two = RegisterLayout::new([("q".to_string(), 1), ("r".to_string(), 1)]);
    let guard = GuardPredicate::qubit(0);
    let per_body = trials.div_ceil(8).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut specs = Vec::new();
    for (_, body) in library_bodies() {
        specs.push(SuiteSpec { guard, body, layout: one.clone(), ancillas: n_max.min(5), n_max: n_max.min(5), trials: per_body, seed: rng.random(), closed });
    }
    for k in 0..3 {
        let (layout, targets, dim) = if k == 0 { (&one, vec![Qubit::reg(0)], 2) } else { (&two, vec![Qubit::reg(0), Qubit::reg(1)], 4) };
        let ancillas = if dim == 2 { n_max.min(5) } else { n_max.min(4) };
        let body = CoreStmt::Apply { op: GateOp::Matrix { matrix: random_unitary(dim, &mut rng), targets }, controls: Vec::new() };
        specs.push(SuiteSpec { guard, body, layout: layout.clone(), ancillas, n_max: ancillas, trials: per_body, seed: rng.random(), closed });
    }
    for spec in &specs {
        report.merge(check_suite(spec)?);
    }
    report.record("basis_convergence", basis_convergence(n_max.min(5), n_max.min(5))?, 1e-12);
    Ok(report)
}
