use proptest::prelude::*;

use super::*;
use crate::filtration::{build_filtration, AlgebraSpec};
use crate::testutil::{random_martingale, random_positive_martingale, random_unit_rows, rng};

fn tensor(n: usize) -> Filtration {
    build_filtration(AlgebraSpec::TensorDyadic { levels: n }).unwrap()
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

#[test]
fn large_lambda_trivializes() {
    let f = random_positive_martingale(&mut rng(1), &tensor(3));
    let parts = gundy(&f, op_norm(f.top()) * 1.01).unwrap();
    for (k, d) in f.differences().iter().enumerate() {
        assert!(parts.d_beta[k].frobenius() < 1e-14);
        assert!(parts.d_gamma[k].frobenius() < 1e-14);
        assert!((&parts.d_alpha[k] - d).frobenius() < 1e-14);
    }
    let r = gundy_verify(&f, &parts).unwrap();
    assert!(r.beta_ratio < 1e-12 && r.gamma_ratio < 1e-12);
}

#[test]
fn two_point_gamma_vanishes() {
    let filt = tensor(1);
    let f = Martingale::from_top(&filt, &Operator::from_real_diagonal(&[2.0, 0.0]).unwrap()).unwrap();
    let parts = gundy(&f, 1.5).unwrap();
    assert!(parts.d_gamma.iter().all(|d| d.frobenius() < 1e-14));
    // dalpha_1 = e22 df_1 e22 - E_0(e22 df_1 e22) = -e22 + 1/2
    let want = Operator::from_real_diagonal(&[0.5, -0.5]).unwrap();
    assert!((&parts.d_alpha[1] - &want).frobenius() < 1e-14);
    let r = gundy_verify(&f, &parts).unwrap();
    assert!((r.gamma_ratio - 0.75).abs() < 1e-12);
    assert!(gundy(&f, 0.0).is_err());
}

#[test]
fn single_block_and_dirac_splits() {
    let f = random_martingale(&mut rng(2), &tensor(3));
    let xi = random_unit_rows(&mut rng(3), 4, 2);
    let trivial = PiFamily::trivial(Projection::identity(f.top().trace_functional()));
    let (a, b) = split_transforms(&f, &xi, &trivial).unwrap();
    let t = transform_family(&f, &xi).unwrap();
    for m in 0..2 {
        assert!((&a.members()[m] - &t.members()[m]).frobenius() < 1e-14);
        assert!(b.members()[m].frobenius() == 0.0);
    }

    let g = random_positive_martingale(&mut rng(4), &tensor(3));
    let parts = thm_a1_decompose(&g, &CoeffMatrix::dirac(4, 4)).unwrap();
    assert_eq!(parts.shift, 0.0);
    for (m, d) in g.differences().iter().enumerate() {
        let (r, c) = delta_split(d, &parts.pi);
        assert!((&parts.a.members()[m] - &r).frobenius() < 1e-14);
        assert!((&parts.b.members()[m] - &c).frobenius() < 1e-14);
    }
}

#[test]
fn hermitian_input_is_shifted() {
    let filt = tensor(2);
    let f = Martingale::from_top(&filt, &Operator::from_real_diagonal(&[1.0, -2.0, 0.5, 0.0]).unwrap()).unwrap();
    let parts = thm_a1_decompose(&f, &CoeffMatrix::dirac(3, 3)).unwrap();
    assert!((parts.shift - 2.0).abs() < 1e-12);
}

#[test]
fn weak11_zero_and_dirac() {
    let filt = tensor(4);
    let zero = Martingale::from_top(&filt, &filt.zero()).unwrap();
    let r = weak11_experiment(&zero, &CoeffMatrix::dirac(5, 5), -4..=4).unwrap();
    assert_eq!((r.row_ratio, r.col_ratio), (0.0, 0.0));

    let f = random_positive_martingale(&mut rng(5), &filt);
    let r = weak11_experiment(&f, &CoeffMatrix::dirac(5, 5), -20..=20).unwrap();
    assert!(r.row_ratio.is_finite() && r.row_ratio <= 64.0 && r.col_ratio <= 64.0);
    assert!(r.reconstruction <= 1e-12);
    // the dyadic grid sees the weak norm up to a factor 2
    assert!(r.row_ratio <= r.row_weak + 1e-12 && r.row_weak <= 2.0 * r.row_ratio + 1e-12);
    assert!(r.col_ratio <= r.col_weak + 1e-12 && r.col_weak <= 2.0 * r.col_ratio + 1e-12);

    let big = CoeffMatrix::from_real(&[vec![1.0, 1.0]]).unwrap();
    assert!(weak11_experiment(&f, &big, 0..=1).is_err());
}

#[test]
fn ergodic_coefficients() {
    let xi = ergodic_coeffs(100).unwrap();
    assert!((xi.xi(1, 1).re - 0.5).abs() < 1e-15);
    assert_eq!(xi.xi(3, 2), C64::new(0.0, 0.0));
    assert!((xi.xi(2, 3).re - 2.0 / (3f64.sqrt() * 4.0)).abs() < 1e-15);
    assert!(xi.bound() <= 1.0);
    // direct summation of k^2 / (m (m+1)^2)
    for k in [1usize, 10, 50] {
        let s: f64 = (k..=100).map(|m| (k * k) as f64 / (m as f64 * ((m + 1) * (m + 1)) as f64)).sum();
        assert!((xi.row_square_sums()[k - 1] - s).abs() < 1e-12);
    }
    assert!(ergodic_coeffs(0).is_err());
}

#[test]
fn reversal_round_trip() {
    let f = random_martingale(&mut rng(6), &tensor(2));
    let d = f.differences();
    let back = reverse_differences(&reverse_differences(&d));
    assert!(d.iter().zip(&back).all(|(a, b)| a == b));
}

#[test]
fn cross_with_dirac_coefficients() {
    let f = random_martingale(&mut rng(7), &tensor(3));
    let dirac = CoeffMatrix::dirac(4, 4);
    let r = cross_experiment(&f, &dirac, &dirac, 4.0).unwrap();
    // block diagonal: ||diag(df_m)||_4^4 = sum_m ||df_m||_4^4
    let direct: f64 = f.differences().iter().map(|d| schatten_norm(d, 4.0).unwrap().powi(4)).sum::<f64>().powf(0.25);
    assert!((r.matrix_norm - direct).abs() <= 1e-10 * direct);
    let xi = product_coeffs(&random_unit_rows(&mut rng(8), 4, 2), &random_unit_rows(&mut rng(9), 4, 3)).unwrap();
    assert!(xi.row_square_sums().iter().all(|s| (s - 1.0).abs() < 1e-12));
    assert!(cross_experiment(&f, &dirac.scale_rows(&[1.0, 0.5, 1.0, 1.0]).unwrap(), &dirac, 4.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gundy_identities(seed in any::<u64>(), e in -1i32..=3) {
        for filt in kinds() {
            let f = random_positive_martingale(&mut rng(seed), &filt);
            let parts = gundy(&f, 2f64.powi(e)).unwrap();
            let r = gundy_verify(&f, &parts).unwrap();
            let scale = f.top().l2_norm();
            prop_assert!(r.reconstruction <= 1e-10 * scale);
            prop_assert!(r.martingale_defect <= 1e-10 * scale);
            prop_assert!(r.gamma_annihilation <= 1e-10 * scale);
            prop_assert!(r.gamma_ratio <= 1.0 + 1e-8);
            prop_assert!(r.alpha_ratio <= 64.0 && r.beta_ratio <= 64.0);
            for (k, d) in f.differences().iter().enumerate() {
                let s = &(&parts.d_alpha[k] + &parts.d_beta[k]) + &parts.d_gamma[k];
                prop_assert!((&s - d).frobenius() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn thm_a1_reconstruction(seed in any::<u64>(), m in 1usize..4) {
        for filt in kinds() {
            let mut r = rng(seed);
            let f = random_positive_martingale(&mut r, &filt);
            let xi = random_unit_rows(&mut r, filt.top() + 1, m);
            let parts = thm_a1_decompose(&f, &xi).unwrap();
            let t = transform_family(&f, &xi).unwrap();
            for j in 0..m {
                let s = &parts.a.members()[j] + &parts.b.members()[j];
                prop_assert!((&s - &t.members()[j]).frobenius() <= 1e-12 * f.top().frobenius());
            }
        }
    }

    #[test]
    fn gamma_killed_by_truncation(seed in any::<u64>()) {
        for filt in kinds() {
            let f = random_positive_martingale(&mut rng(seed), &filt);
            let pi = pi_for(&f).unwrap();
            for l in pi.l_min()..=pi.l_max() {
                let parts = gundy(&f, 2f64.powi(l)).unwrap();
                for d in &parts.d_gamma {
                    prop_assert!(op_norm(&delta_trunc(d, &pi, l)) <= 1e-10 * op_norm(f.top()));
                }
            }
        }
    }

    #[test]
    fn alpha_l2_chain(seed in any::<u64>(), m in 1usize..4) {
        let filt = tensor(3);
        let mut r = rng(seed);
        let f = random_positive_martingale(&mut r, &filt);
        let xi = random_unit_rows(&mut r, 4, m);
        let pi = pi_for(&f).unwrap();
        let l = pi.l_min();
        let parts = gundy(&f, 2f64.powi(l)).unwrap();
        let fam = truncated_family(&parts.d_alpha, &xi, &pi, l).unwrap();
        let lhs = fam.members().iter().fold(f.top().zero_like(), |a, g| &a + &(g * &g.adjoint()));
        let trunc: Vec<Operator> = parts.d_alpha.iter().map(|d| delta_trunc(d, &pi, l)).collect();
        let mut rhs = f.top().zero_like();
        for j in 0..4 {
            for k in 0..4 {
                let c: C64 = (0..m).map(|n| xi.entries()[(j, n)] * xi.entries()[(k, n)].conj()).sum();
                rhs = &rhs + &(&trunc[j] * &trunc[k].adjoint()).scale(c);
            }
        }
        prop_assert!((&lhs - &rhs).frobenius() <= 1e-9 * lhs.frobenius().max(1.0));
    }

    #[test]
    fn cross_ratio_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_martingale(&mut r, &tensor(3));
        let rho = random_unit_rows(&mut r, 4, 2);
        let eta = random_unit_rows(&mut r, 4, 3);
        let rep = cross_experiment(&f, &rho, &eta, 4.0).unwrap();
        prop_assert!(rep.ratio() <= 64.0);
        prop_assert!(rep.matrix_norm > 0.0);
    }
}
