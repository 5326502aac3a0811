use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::*;
use crate::gates::{matrix_of, GateKind, GuardPredicate, Qubit};
use crate::lang::{desugar, parse, CoreStmt};
use crate::linalg::{max_entry_deviation, operator_norm, CMatrix, CVector};
use crate::state::{BasisLabel, Ket, RegisterLayout};

fn qubit_space(ancillas: usize) -> SpaceSpec {
    SpaceSpec::new(ancillas, vec![1]).unwrap()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn body(src: &str) -> CoreStmt {
    desugar(&parse(&format!("qubit q; {src}")).unwrap()).unwrap().body
}

fn plus(space: &SpaceSpec) -> CVector {
    let mut v = CVector::zeros(space.dim());
    v[0] = c(FRAC_1_SQRT_2);
    v[1] = c(FRAC_1_SQRT_2);
    v
}

#[test]
fn index_round_trip() {
    let space = SpaceSpec::new(3, vec![1, 3]).unwrap();
    for idx in 0..space.dim() {
        assert_eq!(space.index_of(&space.label_of(idx)).unwrap(), idx);
    }
    let mut labels: Vec<BasisLabel> = (0..space.dim()).map(|i| space.label_of(i)).collect();
    let sorted = {
        let mut s = labels.clone();
        s.sort();
        s
    };
    assert_eq!(labels, sorted, "index order is label order");
    labels.dedup();
    assert_eq!(labels.len(), space.dim());
    assert_eq!(space.index_of(&BasisLabel::from_parts("101", vec![1, 5]).unwrap()).unwrap(), 0b101_1101);
    assert!(space.index_of(&BasisLabel::from_parts("0001", vec![0, 0]).unwrap()).is_err());
}

#[test]
fn dimension_cap() {
    assert!(SpaceSpec::new(12, vec![]).is_ok());
    assert!(matches!(SpaceSpec::new(10, vec![3]), Err(OracleError::TooLarge(13))));
}

#[test]
fn loop_free_programs() {
    let space = qubit_space(0);
    assert_eq!(dense_of_program(&CoreStmt::Skip, &space).unwrap().matrix, space.identity());
    let x = dense_of_program(&body("x q;"), &space).unwrap().matrix;
    assert_eq!(x, matrix_of(&GateKind::X, None).unwrap());
    let hh = dense_of_program(&body("h q; h q;"), &space).unwrap().matrix;
    assert!(max_entry_deviation(&hh, &space.identity()) < 1e-12);
    assert!(matches!(dense_of_program(&body("while q { x q; }"), &space), Err(OracleError::HasLoop)));
}

#[test]
fn if_matches_controlled_construction() {
    // |0>_t (a|0> + b|1>)_q  ->  a|00> + b|1>_t X|1>_q
    let core = desugar(&parse("qubit q; if q { x q; }").unwrap()).unwrap();
    let space = SpaceSpec::for_layout(1, &core.layout).unwrap();
    let m = dense_of_program(&core.body, &space).unwrap().matrix;
    let x = matrix_of(&GateKind::X, None).unwrap();
    let none = crate::gates::ControlSpec::none();
    let g = space.guard_copy(&GuardPredicate::qubit(0), 1, &none);
    let want = (space.projector(1, false) + space.projector(1, true) * space.extend(&x, &[Qubit::reg(0)], &none)) * g;
    assert!(max_entry_deviation(&m, &want) < 1e-12);
    let (a, b) = (c(0.6), c(0.8));
    let out = &m * CVector::from_vec(vec![a, b, c(0.0), c(0.0)]);
    assert_eq!(out, CVector::from_vec(vec![a, c(0.0), b, c(0.0)]));
}

#[test]
fn w_examples() {
    let g = GuardPredicate::qubit(0);
    let space = qubit_space(2);
    for v in [Variant::Recursive, Variant::Closed] {
        assert_eq!(dense_w(0, &g, &body("x q;"), &space, v).unwrap().matrix, space.identity());
        let w2 = dense_w(2, &g, &body("x q;"), &space, v).unwrap();
        let mut want = CVector::zeros(8);
        want[0] = c(FRAC_1_SQRT_2);
        want[0b100] = c(FRAC_1_SQRT_2);
        assert!((w2.apply(&plus(&space)) - want).norm() < 1e-12);
    }
    let small = qubit_space(1);
    let w1 = dense_w(1, &g, &CoreStmt::Skip, &small, Variant::Recursive).unwrap().matrix;
    // |0>_t|1>_q -> |1>_t|1>_q, |0>_t|0>_q fixed
    assert_eq!(w1[(0b11, 0b01)], c(1.0));
    assert_eq!(w1[(0b00, 0b00)], c(1.0));
}

#[test]
fn l_examples() {
    let g = GuardPredicate::qubit(0);
    let space = qubit_space(3);
    for v in [Variant::Recursive, Variant::Closed] {
        assert_eq!(dense_l(0, &g, &body("x q;"), &space, v).unwrap().matrix, space.zero());
        let l1 = dense_l(1, &g, &body("x q;"), &qubit_space(1), v).unwrap().matrix;
        assert!(l1.column(0b01).iter().all(|z| z.norm() == 0.0));
        let l3 = dense_l(3, &g, &body("h q;"), &space, v).unwrap();
        let got = space.vector_to_ket(&l3.apply(&plus(&space))).unwrap();
        let want = Ket::from_terms([
            (BasisLabel::from_parts("", vec![0]).unwrap(), c(FRAC_1_SQRT_2)),
            (BasisLabel::from_parts("1", vec![0]).unwrap(), c(0.5)),
            (BasisLabel::from_parts("11", vec![0]).unwrap(), c(-0.5 * FRAC_1_SQRT_2)),
        ]);
        assert!(crate::state::add_scaled(c(-1.0), &got, &want).norm() < 1e-12);
    }
}

#[test]
fn guard_must_be_a_qubit() {
    let space = SpaceSpec::new(2, vec![2]).unwrap();
    let g = GuardPredicate { reg: 0, test: crate::gates::GuardTest::NonZero };
    assert_eq!(dense_w(1, &g, &CoreStmt::Skip, &space, Variant::Recursive), Err(OracleError::NotQubitGuard));
    assert!(matches!(dense_w(3, &GuardPredicate::qubit(0), &CoreStmt::Skip, &space, Variant::Recursive), Err(OracleError::TooFewAncillas { .. })));
}

#[test]
fn equivalence_grid() {
    let g = GuardPredicate::qubit(0);
    let space = qubit_space(4);
    let mut worst: f64 = 0.0;
    for (_, b) in library_bodies() {
        for n in 0..=4 {
            let wr = dense_w(n, &g, &b, &space, Variant::Recursive).unwrap().matrix;
            let wc = dense_w(n, &g, &b, &space, Variant::Closed).unwrap().matrix;
            let lr = dense_l(n, &g, &b, &space, Variant::Recursive).unwrap().matrix;
            let lc = dense_l(n, &g, &b, &space, Variant::Closed).unwrap().matrix;
            worst = worst.max(max_entry_deviation(&wr, &wc)).max(max_entry_deviation(&lr, &lc));
            assert!(operator_norm(&lr, 1e-12, 10_000) <= 1.0 + 1e-9);
        }
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn off_by_one_is_caught() {
    let g = GuardPredicate::qubit(0);
    let space = qubit_space(4);
    let b = body("h q;");
    let wr = dense_w(3, &g, &b, &space, Variant::Recursive).unwrap().matrix;
    let wm = dense_w(3, &g, &b, &space, Variant::ClosedOffByOne).unwrap().matrix;
    assert!(max_entry_deviation(&wr, &wm) >= 0.5);
}

#[test]
fn suite_passes_on_x_loop() {
    let spec = SuiteSpec {
        guard: GuardPredicate::qubit(0),
        body: body("x q;"),
        layout: RegisterLayout::new([("q".to_string(), 1)]),
        ancillas: 4,
        n_max: 4,
        trials: 10,
        seed: 7,
        closed: Variant::Closed,
    };
    let report = check_suite(&spec).unwrap();
    assert!(report.passed(), "{report:?}");
    for r in report.properties.values() {
        assert!(r.max_deviation <= 1e-10);
    }
}

#[test]
fn default_suite_and_mutation() {
    let good = default_suite(4, 16, 1, Variant::Closed).unwrap();
    assert!(good.passed(), "{good:#?}");
    let bad = default_suite(4, 16, 1, Variant::ClosedOffByOne).unwrap();
    assert!(!bad.passed());
    assert!(bad.get("closed_vs_recursive_w").unwrap().max_deviation >= 0.5);
    let json = serde_json::to_value(&good).unwrap();
    assert_eq!(json["telescoping"]["pass"], serde_json::Value::Bool(true));
}

#[test]
fn basis_vectors_converge() {
    assert!(basis_convergence(5, 5).unwrap() <= 1e-12);
}

#[test]
fn random_unitary_is_unitary() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let u: CMatrix = random_unitary(4, &mut rng);
    assert!(crate::linalg::unitarity_deviation(&u).unwrap() < 1e-12);
}

