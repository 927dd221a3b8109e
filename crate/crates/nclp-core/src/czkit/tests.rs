use proptest::prelude::*;

use super::*;
use crate::filtration::{build_filtration, AlgebraSpec};
use crate::testutil::{random_like, random_positive_martingale, rng};

fn grid_filt(dim: usize, depth: usize, size: usize) -> Filtration {
    build_filtration(AlgebraSpec::GridMatrix { dim, depth, size }).unwrap()
}

fn random_f(seed: u64, filt: &Filtration) -> Operator {
    random_positive_martingale(&mut rng(seed), filt).top().clone()
}

#[test]
fn large_lambda_is_trivial() {
    let filt = grid_filt(1, 4, 2);
    let f = random_f(1, &filt);
    let lam = op_norm(&f) * 1.01;
    let parts = cz_decompose(&filt, &f, lam).unwrap();
    assert!((parts.cuculescu.q_final().measure() - 1.0).abs() < 1e-12);
    assert!((&parts.g_d - &f).frobenius() < 1e-12);
    for x in [&parts.g_off, &parts.b_d, &parts.b_off] {
        assert!(x.frobenius() < 1e-12);
    }
    assert!(g_off_layers(&parts).layers.iter().all(|l| l.frobenius() < 1e-12));
    let z = zeta(&filt, &f, lam).unwrap();
    assert!(z.psi.iter().all(|p| p.frobenius() < 1e-12));
    assert!((z.zeta.measure() - 1.0).abs() < 1e-12);
}

#[test]
fn rejects_non_positive_and_non_grid() {
    let filt = grid_filt(1, 2, 1);
    let f = Operator::from_blocks((0..4).map(|i| CMat::from_element(1, 1, (i as f64 - 1.5).into())).collect()).unwrap();
    assert!(cz_decompose(&filt, &f, 1.0).is_err());
    let g = random_f(2, &filt);
    assert!(cz_decompose(&filt, &g, 0.0).is_err());
    let tensor = build_filtration(AlgebraSpec::TensorDyadic { levels: 2 }).unwrap();
    assert!(cz_decompose(&tensor, &tensor.identity(), 1.0).is_err());
}

#[test]
fn scalar_off_diagonal_parts_vanish() {
    let filt = grid_filt(1, 5, 1);
    for seed in 0..5 {
        let f = random_f(seed, &filt);
        for e in -2..4 {
            let parts = cz_decompose(&filt, &f, 2f64.powi(e)).unwrap();
            assert!(parts.b_off.frobenius() < 1e-12);
            assert!(parts.g_off.frobenius() < 1e-12);
        }
    }
}

/// `9`-fold dilation of the maximal cubes where a dyadic average exceeds `lambda`.
fn classical_dilated_set(grid: &Grid, values: &[f64], lambda: f64) -> Vec<bool> {
    let cells = grid.cells();
    let mean = values.iter().sum::<f64>() / cells as f64;
    let mut out = vec![false; cells];
    let mut k = -1i32;
    while 2f64.powi(grid.dim as i32 * k) * mean > lambda {
        k -= 1;
    }
    if (k + 1..0).any(|s| 2f64.powi(grid.dim as i32 * s) * mean > lambda) {
        return vec![true; cells];
    }
    let mut stopped = vec![mean > lambda; cells];
    for s in 0..=grid.depth {
        for cube in grid.cubes(s) {
            let cs = cube.cells(grid);
            let avg = cs.iter().map(|&c| values[c]).sum::<f64>() / cs.len() as f64;
            if avg > lambda && !stopped[cs[0]] {
                for x in cube.concentric_father(grid, 9).unwrap() {
                    out[x] = true;
                }
            }
            if avg > lambda {
                for &c in &cs {
                    stopped[c] = true;
                }
            }
        }
    }
    if mean > lambda {
        return vec![true; cells];
    }
    out
}

#[test]
fn scalar_zeta_matches_dilated_level_set() {
    for (dim, depth) in [(1, 6), (2, 3)] {
        let filt = grid_filt(dim, depth, 1);
        let grid = filt.grid().unwrap();
        for seed in 0..4 {
            let f = random_f(seed, &filt);
            let values: Vec<f64> = f.blocks().iter().map(|b| b[(0, 0)].re).collect();
            for e in -3..=5 {
                let lam = 2f64.powi(e);
                let z = zeta(&filt, &f, lam).unwrap();
                let want = classical_dilated_set(&grid, &values, lam);
                for (x, &bad) in want.iter().enumerate() {
                    let got = 1.0 - z.zeta.as_operator().block(x)[(0, 0)].re;
                    assert!((got - if bad { 1.0 } else { 0.0 }).abs() < 1e-9, "dim {dim} seed {seed} lambda {lam} cell {x}");
                }
                let r = zeta_verify(&z).unwrap();
                assert!(r.weak_mass <= r.bound + 1e-8);
            }
        }
    }
}

#[test]
fn ancestors_take_over_when_the_mean_is_large() {
    let filt = grid_filt(1, 3, 2);
    let f = random_f(3, &filt).scale_real(40.0);
    let parts = cz_decompose(&filt, &f, 1.0).unwrap();
    let cuc = &parts.cuculescu;
    assert!(cuc.k_min() < -1);
    assert!(cuc.m_lambda() >= cuc.k_min());
    let r = cz_verify(&filt, &parts).unwrap();
    assert!(r.g_d_l2_sq <= r.g_d_bound + 1e-8);
    assert!(r.b_d_l1_sum <= r.b_d_bound + 1e-8);
    assert!(r.reconstruction <= 1e-10 * op_norm(&f));
}

#[test]
fn two_level_layer_unrolled() {
    let filt = grid_filt(1, 1, 2);
    let f = random_f(4, &filt);
    let mean = op_norm(&filt.cond_expect(&f, 0).unwrap());
    let parts = cz_decompose(&filt, &f, 0.75 * mean).unwrap();
    let cuc = &parts.cuculescu;
    assert_eq!(cuc.k_min(), -1);
    let layers = g_off_layers(&parts);
    let p0 = cuc.p(0);
    let q0 = cuc.q(0);
    let df1 = &f - &filt.cond_expect(&f, 0).unwrap();
    let want = &df1.sandwich(&p0, q0.as_operator()) + &df1.sandwich(q0.as_operator(), &p0);
    assert!(p0.frobenius() > 0.1);
    assert!((&layers.layers[0] - &want).frobenius() < 1e-12);
    assert!(layers.layers[1..].iter().all(|l| l.frobenius() < 1e-12));
}

#[test]
fn trivial_pi_gives_no_split() {
    let filt = grid_filt(1, 3, 2);
    let mut r = rng(5);
    let t = OperatorFamily::new(vec![random_like(&mut r, &filt.identity()), random_like(&mut r, &filt.identity())])
        .unwrap();
    let parts = thm_b1_decompose(&t, PiFamily::trivial(Projection::identity(filt.trace_functional()))).unwrap();
    for (m, x) in t.members().iter().enumerate() {
        assert!(parts.a.members()[m].frobenius() == 0.0 && parts.b.members()[m].frobenius() == 0.0);
        assert!((&parts.psi_part.members()[m] - x).frobenius() < 1e-12);
    }
    let zero = filt.zero();
    let pi = zeta_meets(&filt, &zero, -3).unwrap();
    assert!((pi.residual().measure() - 1.0).abs() < 1e-12);
}

#[test]
fn thm_b1_split_and_absorption() {
    let filt = grid_filt(1, 3, 2);
    let f = random_f(6, &filt);
    let pi = zeta_meets(&filt, &f, -4).unwrap();
    assert!(pi.completeness_defect() < 1e-8);
    assert!(pi.blocks().skip(1).any(|(_, p)| p.measure() > 0.0));
    let mut r = rng(7);
    let t = OperatorFamily::new((0..3).map(|_| random_like(&mut r, &f)).collect()).unwrap();
    let parts = thm_b1_decompose(&t, pi).unwrap();
    for (m, x) in t.members().iter().enumerate() {
        let sum = &(&parts.psi_part.members()[m] + &parts.a.members()[m]) + &parts.b.members()[m];
        assert!((&sum - x).frobenius() <= 1e-12 * x.frobenius());
    }
    let psi = parts.pi.residual().as_operator();
    for l in parts.pi.l_min()..=parts.pi.l_max() {
        let w = parts.pi.w(l).unwrap();
        assert!(op_norm(&(psi - &(w.as_operator() * psi))) < 1e-8);
        assert!(absorption_defect(&parts, &t, l).unwrap() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cz_properties(seed in any::<u64>(), e in -3i32..=4) {
        for filt in [grid_filt(1, 4, 2), grid_filt(2, 2, 2)] {
            let f = random_f(seed, &filt);
            let lam = 2f64.powi(e);
            let parts = cz_decompose(&filt, &f, lam).unwrap();
            let r = cz_verify(&filt, &parts).unwrap();
            let scale = op_norm(&f);
            prop_assert!(r.reconstruction <= 1e-10 * scale);
            prop_assert!(r.g_d_l2_sq <= r.g_d_bound + 1e-8);
            prop_assert!(r.b_d_l1_sum <= r.b_d_bound + 1e-8);
            prop_assert!(r.mean_zero <= 1e-10 * scale);
            prop_assert!(r.disjointness <= 1e-10);
            prop_assert!(r.projection_defect <= 1e-10);

            let layers = g_off_layers(&parts);
            let sum = layers.layers.iter().fold(f.zero_like(), |a, l| &a + l);
            prop_assert!(op_norm(&(&sum - &parts.g_off)) <= 1e-10 * scale);
            prop_assert!(layers.support_defect <= 1e-10 * scale);
            for (l, t) in layers.layers.iter().zip(&layers.term_l2_sq) {
                prop_assert!((l.l2_norm_sq() - t).abs() <= 1e-9 * t.max(1.0));
            }
        }
    }

    #[test]
    fn zeta_lemma(seed in any::<u64>(), e in -3i32..=4) {
        for filt in [grid_filt(1, 4, 2), grid_filt(2, 2, 2)] {
            let f = random_f(seed, &filt);
            let z = zeta(&filt, &f, 2f64.powi(e)).unwrap();
            let r = zeta_verify(&z).unwrap();
            prop_assert!(r.weak_mass <= r.bound + 1e-8);
            prop_assert!(r.strong_min_eig >= -1e-8);
            prop_assert!(r.weak_min_eig >= -1e-8);
            prop_assert!(r.order_defect <= 1e-8);
        }
    }
}
