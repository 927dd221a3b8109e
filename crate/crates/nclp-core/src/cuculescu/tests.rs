use proptest::prelude::*;

use super::*;
use crate::filtration::{build_filtration, AlgebraSpec, Filtration};
use crate::opcore::CMat;
use crate::testutil::{random_like, random_positive_martingale, rng};

fn two_point() -> Martingale {
    let filt = build_filtration(AlgebraSpec::TensorDyadic { levels: 1 }).unwrap();
    Martingale::from_top(&filt, &Operator::from_real_diagonal(&[2.0, 0.0]).unwrap()).unwrap()
}

fn diag_proj(v: &[f64]) -> Projection {
    Projection::new(Operator::from_real_diagonal(v).unwrap()).unwrap()
}

fn close(a: &Operator, b: &Operator, tol: f64) -> bool {
    (a - b).frobenius() <= tol
}

/// `||(1 - q) p||`, zero iff `p <= q`.
fn order_defect(p: &Projection, q: &Projection) -> f64 {
    op_norm(&(q.complement().as_operator() * p.as_operator()))
}

fn l_max_for(f: &Martingale) -> i32 {
    op_norm(f.top()).log2().floor() as i32 + 1
}

#[test]
fn two_point_recursion() {
    let f = two_point();
    let seq = cuculescu(&f, 1.5).unwrap();
    assert!(close(seq.projections()[0].as_operator(), &Operator::identity(f.top().trace_functional()), 1e-12));
    assert!(close(seq.projections()[1].as_operator(), &diag_proj(&[0.0, 1.0]), 1e-12));
    let q = seq.meet().unwrap();
    assert!(close(q.as_operator(), &diag_proj(&[0.0, 1.0]), 1e-12));
    let r = seq.verify(&f).unwrap();
    assert!((r.weak_mass - 0.75).abs() < 1e-12);
    assert!((r.sup_l1 - 1.0).abs() < 1e-12);
}

#[test]
fn literal_endpoint_expels_kernel() {
    let f = two_point();
    let seq = cuculescu_with(&f, 1.5, Endpoint::Literal).unwrap();
    assert_eq!(seq.endpoint(), Endpoint::Literal);
    assert!(seq.projections()[1].measure().abs() < 1e-12);
}

#[test]
fn constant_martingales() {
    let filt = build_filtration(AlgebraSpec::TensorDyadic { levels: 2 }).unwrap();
    let f = Martingale::from_top(&filt, &filt.identity().scale_real(0.7)).unwrap();
    for q in cuculescu(&f, 1.0).unwrap().projections() {
        assert!((q.measure() - 1.0).abs() < 1e-12);
    }
    for q in cuculescu(&f, 0.5).unwrap().projections() {
        assert!(q.measure().abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_inputs() {
    let f = two_point();
    assert!(cuculescu(&f, 0.0).is_err());
    let filt = f.filtration().clone();
    let neg = Martingale::from_top(&filt, &Operator::from_real_diagonal(&[1.0, -1.0]).unwrap()).unwrap();
    assert!(cuculescu(&neg, 1.0).is_err());
    assert!(pi_family(&f, 0, 0).is_err());
}

#[test]
fn large_lambda_gives_identity() {
    let filt = build_filtration(AlgebraSpec::Corner { size: 4 }).unwrap();
    let f = random_positive_martingale(&mut rng(3), &filt);
    let lam = op_norm(f.top()) * 1.01;
    assert!((cuculescu(&f, lam).unwrap().meet().unwrap().measure() - 1.0).abs() < 1e-12);
}

#[test]
fn pi_family_examples() {
    let filt = build_filtration(AlgebraSpec::TensorDyadic { levels: 2 }).unwrap();
    let small = Martingale::from_top(&filt, &Operator::from_real_diagonal(&[0.5, 1.0, 0.2, 0.9]).unwrap()).unwrap();
    let pi = pi_family(&small, 0, 3).unwrap();
    assert!((pi.residual().measure() - 1.0).abs() < 1e-12);
    for (k, p) in pi.blocks().skip(1) {
        assert!(p.measure().abs() < 1e-12, "pi_{k} nonzero");
    }

    let f = two_point();
    let pi = pi_family(&f, 0, 2).unwrap();
    let q1 = cuculescu(&f, 1.0).unwrap().meet().unwrap();
    assert!(close(pi.pi(1).unwrap(), q1.complement().as_operator(), 1e-12));
    assert!(pi.pi(2).unwrap().measure().abs() < 1e-12);
    assert!(pi.w(0).is_ok() && pi.w(-1).is_err());
}

#[test]
fn delta_split_examples() {
    let one = diag_proj(&[1.0, 1.0]);
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    let x = Operator::from_matrix(m).unwrap();

    let (r, c) = delta_split(&x, &PiFamily::trivial(one.clone()));
    assert!(close(&r, &x, 0.0) && c.frobenius() == 0.0);

    let pi = PiFamily::from_meets(0, vec![diag_proj(&[1.0, 0.0]), one]).unwrap();
    let (r, c) = delta_split(&x, &pi);
    assert!(r.frobenius() < 1e-15);
    assert!(close(&c, &x, 1e-15));
    assert!(delta_trunc(&x, &pi, 1).frobenius() < 1e-15);
    assert!(close(&delta_trunc(&x.adjoint(), &pi, 1), &x.adjoint(), 1e-15));
    assert!(delta_trunc(&x.adjoint(), &pi, 0).frobenius() < 1e-15);
}

fn kinds() -> Vec<Filtration> {
    [
        AlgebraSpec::TensorDyadic { levels: 3 },
        AlgebraSpec::GridMatrix { dim: 1, depth: 3, size: 2 },
        AlgebraSpec::Corner { size: 4 },
    ]
    .into_iter()
    .map(|s| build_filtration(s).unwrap())
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn cuculescu_properties(seed in any::<u64>(), e in -2i32..=4) {
        let lambda = 2f64.powi(e);
        for filt in kinds() {
            let f = random_positive_martingale(&mut rng(seed), &filt);
            let r = cuculescu(&f, lambda).unwrap().verify(&f).unwrap();
            prop_assert!(r.commutator <= 1e-8);
            prop_assert!(r.domination_excess <= 1e-8);
            prop_assert!(r.monotonicity_excess <= 1e-8);
            prop_assert!(r.weak_mass <= r.sup_l1 + 1e-8);
        }
    }

    #[test]
    fn q_lambda_monotone_commutative(seed in any::<u64>()) {
        for spec in [AlgebraSpec::GridMatrix { dim: 1, depth: 4, size: 1 }, AlgebraSpec::GridMatrix { dim: 2, depth: 2, size: 1 }] {
            let filt = build_filtration(spec).unwrap();
            let f = random_positive_martingale(&mut rng(seed), &filt);
            let qs: Vec<Projection> =
                (-2..=4).map(|e| cuculescu(&f, 2f64.powi(e)).unwrap().meet().unwrap()).collect();
            for w in qs.windows(2) {
                prop_assert!(order_defect(&w[0], &w[1]) <= 1e-8);
            }
        }
    }

    #[test]
    fn pi_family_structure(seed in any::<u64>()) {
        for filt in kinds() {
            let f = random_positive_martingale(&mut rng(seed), &filt);
            let top = l_max_for(&f);
            let pi = pi_family(&f, -2, top).unwrap();
            prop_assert!(pi.completeness_defect() <= 1e-8);
            let blocks: Vec<(i32, &Projection)> = pi.blocks().collect();
            for (i, (_, a)) in blocks.iter().enumerate() {
                for (_, b) in &blocks[i + 1..] {
                    prop_assert!(op_norm(&(a.as_operator() * b.as_operator())) <= 1e-8);
                }
            }
            for l in -2..=top {
                let w = pi.w(l).unwrap();
                for (k, p) in &blocks {
                    let wp = w.as_operator() * p.as_operator();
                    let want = if *k <= l { p.as_operator().clone() } else { p.zero_like() };
                    prop_assert!(op_norm(&(&wp - &want)) <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn delta_split_orthogonal_and_absorbing(seed in any::<u64>()) {
        for filt in kinds() {
            let mut r = rng(seed);
            let f = random_positive_martingale(&mut r, &filt);
            let top = l_max_for(&f);
            let pi = pi_family(&f, -1, top).unwrap();
            let x = random_like(&mut r, f.top());
            let (row, col) = delta_split(&x, &pi);
            prop_assert!(close(&(&row + &col), &x, 1e-12 * x.frobenius()));
            let split = row.l2_norm_sq() + col.l2_norm_sq();
            prop_assert!((split - x.l2_norm_sq()).abs() <= 1e-10 * x.l2_norm_sq());
            for l in -1..=top {
                let t = delta_trunc(&x, &pi, l);
                prop_assert!(t.l2_norm() <= x.l2_norm() + 1e-10);
                let w = pi.w(l).unwrap();
                let lhs = w.as_operator() * &row;
                let rhs = w.as_operator() * &t;
                prop_assert!(op_norm(&(&lhs - &rhs)) <= 1e-8 * op_norm(&x).max(1.0));
            }
        }
    }
}

#[test]
fn noncommutative_q_is_not_monotone() {
    let filt = build_filtration(AlgebraSpec::TensorDyadic { levels: 3 }).unwrap();
    let f = random_positive_martingale(&mut rng(0), &filt);
    let qs: Vec<Projection> = (-2..=4).map(|e| cuculescu(&f, 2f64.powi(e)).unwrap().meet().unwrap()).collect();
    let worst = qs.windows(2).map(|w| order_defect(&w[0], &w[1])).fold(0.0, f64::max);
    assert!(worst > 0.1);
    // the tail meets used by the pi family are monotone by construction
    let pi = pi_family(&f, -2, l_max_for(&f)).unwrap();
    for l in -2..l_max_for(&f) {
        assert!(order_defect(&pi.w(l).unwrap(), &pi.w(l + 1).unwrap()) <= 1e-8);
    }
}
