use proptest::prelude::*;

use super::*;
use crate::testutil::{random_hermitian, random_matrix_op, random_like, rng};

fn grid_op(seed: u64, cells: usize, block: usize) -> Operator {
    let mut r = rng(seed);
    let like = Operator::identity(TraceFunctional::Grid { cells, block });
    random_like(&mut r, &like)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reconstruction_from_spectral_parts(seed in any::<u64>(), n in 1usize..7) {
        let h = random_hermitian(&mut rng(seed), n);
        let parts = spectral_decompose(&h).unwrap();
        let mut rec = h.zero_like();
        let mut total = h.zero_like();
        for w in parts.windows(2) {
            prop_assert!(w[0].0 < w[1].0);
        }
        for (v, p) in &parts {
            rec = &rec + &p.scale_real(*v);
            total = &total + p.as_operator();
        }
        prop_assert!((&rec - &h).frobenius() <= 1e-10 * h.frobenius().max(1.0));
        prop_assert!((&total - &h.identity_like()).frobenius() <= 1e-10);
        for (i, (_, p)) in parts.iter().enumerate() {
            for (_, q) in parts.iter().skip(i + 1) {
                prop_assert!((p.as_operator() * q.as_operator()).frobenius() <= 1e-10);
            }
        }
    }

    #[test]
    fn tracial_property(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let a = random_matrix_op(&mut r, n);
        let b = random_matrix_op(&mut r, n);
        let lhs = ((&a * &b).trace() - (&b * &a).trace()).norm();
        prop_assert!(lhs <= 1e-10 * a.l2_norm() * b.l2_norm());
        let g = grid_op(seed, 4, 2);
        let gs = (&g * &g.adjoint()).trace() - (&g.adjoint() * &g).trace();
        prop_assert!(gs.norm() <= 1e-10 * g.l2_norm_sq());
    }

    #[test]
    fn holder_inequality(seed in any::<u64>(), p in 1.0f64..6.0, q in 1.0f64..6.0) {
        let mut r = rng(seed);
        let a = random_matrix_op(&mut r, 4);
        let b = random_matrix_op(&mut r, 4);
        let rr = 1.0 / (1.0 / p + 1.0 / q);
        prop_assume!(rr >= 1.0);
        let lhs = schatten_norm(&(&a * &b), rr).unwrap();
        let rhs = schatten_norm(&a, p).unwrap() * schatten_norm(&b, q).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn quasi_triangle(seed in any::<u64>(), lambda in 0.05f64..8.0) {
        let mut r = rng(seed);
        let f1 = random_matrix_op(&mut r, 5);
        let f2 = random_matrix_op(&mut r, 5);
        let lhs = lambda * tail_trace(&(&f1 + &f2), lambda).unwrap();
        let rhs = lambda * tail_trace(&f1, lambda / 2.0).unwrap() + lambda * tail_trace(&f2, lambda / 2.0).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn mu_integral_and_weak_norm(seed in any::<u64>(), n in 1usize..7) {
        let a = random_matrix_op(&mut rng(seed), n);
        let mu = mu_function(&a);
        prop_assert!((schatten_norm(&a, 1.0).unwrap() - mu.integral()).abs() <= 1e-9);
        prop_assert!((weak_l1(&a) - mu.sup_t_mu()).abs() <= 1e-9);
        for w in mu.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn spectral_intervals_partition(seed in any::<u64>(), cut in 0.1f64..3.0) {
        let a = random_matrix_op(&mut rng(seed), 5);
        let abs_a = abs(&a).unwrap();
        let low = spectral_projection(&abs_a, Interval::closed(0.0, cut)).unwrap();
        let high = spectral_projection(&abs_a, Interval::above(cut)).unwrap();
        let sum = low.as_operator() + high.as_operator();
        prop_assert!((&sum - &a.identity_like()).frobenius() <= 1e-9);
        prop_assert!((high.measure() - tail_trace(&a, cut).unwrap()).abs() <= 1e-12);
        prop_assert!(tail_trace(&a, cut).unwrap() >= tail_trace(&a, cut * 1.5).unwrap());
    }

    #[test]
    fn tail_trace_symmetric_in_adjoint_square(seed in any::<u64>(), lambda in 0.1f64..5.0) {
        let x = random_matrix_op(&mut rng(seed), 4);
        let xx = (&x * &x.adjoint()).into_hermitian_unchecked();
        let xsx = (&x.adjoint() * &x).into_hermitian_unchecked();
        let a = spectral_projection(&xx, Interval::above(lambda)).unwrap().measure();
        let b = spectral_projection(&xsx, Interval::above(lambda)).unwrap().measure();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn meet_below_and_join_above(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h1 = random_hermitian(&mut r, 5);
        let h2 = random_hermitian(&mut r, 5);
        let p = spectral_projection(&h1, Interval::above(-0.5)).unwrap();
        let q = spectral_projection(&h2, Interval::above(-0.5)).unwrap();
        let m = proj_meet(&[&p, &q]).unwrap();
        let j = proj_join(&[&p, &q]).unwrap();
        for x in [&p, &q] {
            let below = (x.as_operator() - m.as_operator()).into_hermitian_unchecked();
            prop_assert!(min_eigenvalue(&below).unwrap() >= -1e-8);
            let above = (j.as_operator() - x.as_operator()).into_hermitian_unchecked();
            prop_assert!(min_eigenvalue(&above).unwrap() >= -1e-8);
        }
    }
}
