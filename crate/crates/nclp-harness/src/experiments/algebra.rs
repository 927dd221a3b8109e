//! Suites on the matrix algebras: norms, Cuculescu, Gundy, martingale
//! transforms, BMO, ergodic coefficients and cross terms.

use nclp_core::cuculescu::{cuculescu as cuculescu_sequence, delta_split, delta_trunc};
use nclp_core::filtration::{build_filtration, Filtration};
use nclp_core::gundy::{
    cross_experiment, ergodic_coeffs, gundy as gundy_parts, gundy_verify, pi_for, weak11_experiment,
};
use nclp_core::martingale::{bmo_norms, l2_identity_check, l2_weighted_residual, Martingale};
use nclp_core::opcore::{mu_function, op_norm, schatten_norm, weak_l1, Operator};

use super::{check, finish, run_trials, Outcome, EXACT, SLACK};
use crate::config::ExperimentConfig;
use crate::instances::{
    random_coeffs, random_martingale, random_operator, random_positive_martingale, InputDigest, RowNorm,
};
use crate::report::{Assertion, Report};
use crate::Result;

fn filtration(cfg: &ExperimentConfig) -> Result<Filtration> {
    Ok(build_filtration(cfg.algebra.0)?)
}

fn digest_martingale(label: &str, f: &Martingale) -> InputDigest {
    let mut d = InputDigest::new(label);
    d.operator(f.top());
    d
}

fn unit_l2(x: Operator) -> Operator {
    let n = x.l2_norm();
    x.scale_real(1.0 / n)
}

pub fn norms(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = filtration(cfg)?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_positive_martingale(rng, &filt)?;
        let x = unit_l2(random_operator(rng, filt.trace_functional())?);
        let y = unit_l2(random_operator(rng, filt.trace_functional())?);
        let mut o = Outcome::new(digest_martingale("norms", &f).operator(&x).operator(&y).finish());
        let pi = pi_for(&f)?;
        let (row, col) = delta_split(&x, &pi);
        o.set("split_defect", (row.l2_norm_sq() + col.l2_norm_sq() - x.l2_norm_sq()).abs());
        o.set("split_reconstruction", (&(&row + &col) - &x).l2_norm());
        for l in pi.l_min() - 1..=pi.l_max() + 1 {
            o.max("truncation_excess", delta_trunc(&x, &pi, l).l2_norm() - x.l2_norm());
        }
        let l1 = schatten_norm(&x, 1.0)?;
        let mu = mu_function(&x);
        o.set("mu_integral_defect", (mu.integral() - l1).abs() / l1);
        o.set("weak_l1_defect", (weak_l1(&x) - mu.sup_t_mu()).abs() / l1);
        o.set("holder_excess", schatten_norm(&(&x * &y), 1.0)? - x.l2_norm() * y.l2_norm());
        o.set("weak_below_l1", weak_l1(&x) - l1);
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("triangular-truncation-contraction", "truncation_excess", EXACT),
            check("row-column-pythagoras", "split_defect", EXACT),
            check("row-column-reconstruction", "split_reconstruction", EXACT),
            check("mu-integral-is-trace-norm", "mu_integral_defect", EXACT),
            check("weak-l1-from-mu", "weak_l1_defect", EXACT),
            check("holder-l2-l2", "holder_excess", EXACT),
            check("weak-l1-below-l1", "weak_below_l1", EXACT),
        ],
        Vec::new(),
    ))
}

pub fn cuculescu(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = filtration(cfg)?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_positive_martingale(rng, &filt)?;
        let mut o = Outcome::new(digest_martingale("cuculescu", &f).finish());
        for e in cfg.lambda_exp.iter() {
            let r = cuculescu_sequence(&f, 2f64.powi(e))?.verify(&f)?;
            o.max("weak_excess", r.weak_mass - r.sup_l1);
            o.max("weak_ratio", r.weak_mass / r.sup_l1);
            o.max("commutator", r.commutator);
            o.max("domination_excess", r.domination_excess);
            o.max("monotonicity_excess", r.monotonicity_excess);
        }
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("cuculescu-weak-type-constant-1", "weak_excess", SLACK),
            check("cuculescu-commutation", "commutator", SLACK),
            check("cuculescu-domination", "domination_excess", SLACK),
        ],
        Vec::new(),
    ))
}

pub fn gundy(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = filtration(cfg)?;
    let env = cfg.envelope;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_positive_martingale(rng, &filt)?;
        let mut o = Outcome::new(digest_martingale("gundy", &f).finish());
        for e in cfg.lambda_exp.iter() {
            let parts = gundy_parts(&f, 2f64.powi(e))?;
            let r = gundy_verify(&f, &parts)?;
            o.max("reconstruction", r.reconstruction);
            o.max("martingale_defect", r.martingale_defect);
            o.max("gamma_annihilation", r.gamma_annihilation);
            o.max("alpha_ratio", r.alpha_ratio);
            o.max("beta_ratio", r.beta_ratio);
            o.max("gamma_ratio", r.gamma_ratio);
        }
        let pi = pi_for(&f)?;
        o.set("a1_truncation", 0.0);
        for l in pi.l_min()..=pi.l_max() {
            let parts = gundy_parts(&f, 2f64.powi(l))?;
            for d in &parts.d_gamma {
                o.max("a1_truncation", op_norm(&delta_trunc(d, &pi, l)));
            }
        }
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("gundy-reconstruction", "reconstruction", EXACT),
            check("gundy-parts-are-martingales", "martingale_defect", EXACT),
            check("gundy-gamma-annihilated", "gamma_annihilation", EXACT),
            check("gundy-gamma-killed-by-truncation", "a1_truncation", EXACT),
            check("gundy-alpha-envelope", "alpha_ratio", env),
            check("gundy-beta-envelope", "beta_ratio", env),
            check("gundy-gamma-envelope", "gamma_ratio", env),
            check("gundy-gamma-cuculescu", "gamma_ratio", 1.0 + SLACK),
        ],
        Vec::new(),
    ))
}

pub fn transform_l2(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = filtration(cfg)?;
    let rows = filt.top() + 1;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_martingale(rng, &filt)?;
        let unit = random_coeffs(rng, rows, cfg.components, RowNorm::ExactlyOne)?;
        let weighted = random_coeffs(rng, rows, cfg.components, RowNorm::AtMostOne)?;
        let mut o = Outcome::new(digest_martingale("transform-l2", &f).coeffs(&unit).coeffs(&weighted).finish());
        let energy = f.top().l2_norm_sq();
        o.set("unit_row_residual", l2_identity_check(&f, &unit)? / energy);
        o.set("weighted_residual", l2_weighted_residual(&f, &weighted)? / energy);
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("l2-identity-unit-rows", "unit_row_residual", EXACT),
            check("l2-identity-weighted", "weighted_residual", EXACT),
        ],
        Vec::new(),
    ))
}

fn weak11_metrics(o: &mut Outcome, f: &Martingale, xi: &nclp_core::martingale::CoeffMatrix, cfg: &ExperimentConfig) -> Result<()> {
    let r = weak11_experiment(f, xi, cfg.lambda_exp.iter())?;
    o.set("row_ratio", r.row_ratio);
    o.set("col_ratio", r.col_ratio);
    o.set("row_weak", r.row_weak);
    o.set("col_weak", r.col_weak);
    o.set("split_reconstruction", r.reconstruction / f.top().l2_norm());
    Ok(())
}

pub fn transform_weak11(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = filtration(cfg)?;
    let rows = filt.top() + 1;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_positive_martingale(rng, &filt)?;
        let xi = random_coeffs(rng, rows, cfg.components, RowNorm::ExactlyOne)?;
        let mut o = Outcome::new(digest_martingale("transform-weak11", &f).coeffs(&xi).finish());
        weak11_metrics(&mut o, &f, &xi, cfg)?;
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("weak11-row-envelope", "row_ratio", cfg.envelope),
            check("weak11-column-envelope", "col_ratio", cfg.envelope),
            check("weak11-split-reconstruction", "split_reconstruction", EXACT),
        ],
        Vec::new(),
    ))
}

pub fn bmo(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = filtration(cfg)?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_martingale(rng, &filt)?;
        let mut o = Outcome::new(digest_martingale("bmo", &f).finish());
        let b = bmo_norms(&f)?;
        let sup = op_norm(f.top());
        o.set("row_bmo", b.row);
        o.set("col_bmo", b.col);
        o.set("bmo_over_linf", b.max() / sup);
        Ok(o)
    })?;
    Ok(finish(cfg, outcomes, &[check("bmo-below-twice-linf", "bmo_over_linf", 2.0 + EXACT)], Vec::new()))
}

/// `sup_{k <= k_max} sum_{m >= k} k^2 / (m (m+1)^2)`, summed up to `m_max`
/// with the remainder bounded by `k^2 / (2 m_max^2)`.
pub fn ergodic_row_sup(k_max: usize, m_max: usize) -> f64 {
    let mut suffix = vec![0.0; m_max + 2];
    for m in (1..=m_max).rev() {
        let mf = m as f64;
        suffix[m] = suffix[m + 1] + 1.0 / (mf * (mf + 1.0) * (mf + 1.0));
    }
    let tail = 1.0 / (2.0 * (m_max as f64).powi(2));
    (1..=k_max).map(|k| (k as f64).powi(2) * (suffix[k] + tail)).fold(0.0, f64::max)
}

pub fn ergodic(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = filtration(cfg)?;
    let xi = ergodic_coeffs(filt.top() + 1)?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_positive_martingale(rng, &filt)?;
        let mut o = Outcome::new(digest_martingale("ergodic", &f).finish());
        o.set("weighted_residual", l2_weighted_residual(&f, &xi)? / f.top().l2_norm_sq());
        weak11_metrics(&mut o, &f, &xi, cfg)?;
        Ok(o)
    })?;
    let extra = vec![
        Assertion::at_most("ergodic-rows-below-one", ergodic_row_sup(10_000, 2_000_000), 1.0),
        Assertion::at_most("ergodic-truncated-rows-below-one", xi.bound(), 1.0),
    ];
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("ergodic-l2-weighted-identity", "weighted_residual", EXACT),
            check("ergodic-weak11-row-envelope", "row_ratio", cfg.envelope),
            check("ergodic-weak11-column-envelope", "col_ratio", cfg.envelope),
        ],
        extra,
    ))
}

pub fn cross(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = filtration(cfg)?;
    let rows = filt.top() + 1;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_martingale(rng, &filt)?;
        let rho = random_coeffs(rng, rows, 2, RowNorm::ExactlyOne)?;
        let eta = random_coeffs(rng, rows, cfg.components, RowNorm::ExactlyOne)?;
        let mut o = Outcome::new(digest_martingale("cross", &f).coeffs(&rho).coeffs(&eta).finish());
        let r = cross_experiment(&f, &rho, &eta, 4.0)?;
        o.set("matrix_norm", r.matrix_norm);
        o.set("row_norm", r.row_norm);
        o.set("col_norm", r.col_norm);
        o.set("ratio", r.ratio());
        Ok(o)
    })?;
    Ok(finish(cfg, outcomes, &[check("cross-term-envelope", "ratio", cfg.envelope)], Vec::new()))
}
