//! Calderón–Zygmund decomposition, the projection `zeta` and the row/column
//! split driven by it.

use nclp_core::czkit::{absorption_defect, cz_decompose, cz_verify, thm_b1_decompose, zeta as zeta_data, zeta_meets, zeta_verify};
use nclp_core::filtration::{build_filtration, Filtration};
use nclp_core::martingale::OperatorFamily;
use nclp_core::opcore::op_norm;

use super::{check, finish, run_trials, Outcome, EXACT, SLACK};
use crate::config::ExperimentConfig;
use crate::instances::{random_operator, random_positive_martingale, InputDigest};
use crate::report::Report;
use crate::{HarnessError, Result};

fn grid_filtration(cfg: &ExperimentConfig) -> Result<Filtration> {
    cfg.grid()?;
    let filt = build_filtration(cfg.algebra.0)?;
    Ok(filt)
}

pub fn cz(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = grid_filtration(cfg)?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_positive_martingale(rng, &filt)?.top().clone();
        let scale = op_norm(&f);
        let mut o = Outcome::new(InputDigest::new("cz").operator(&f).finish());
        for e in cfg.lambda_exp.iter() {
            let parts = cz_decompose(&filt, &f, 2f64.powi(e))?;
            let r = cz_verify(&filt, &parts)?;
            o.max("g_d_excess", r.g_d_l2_sq - r.g_d_bound);
            o.max("b_d_excess", r.b_d_l1_sum - r.b_d_bound);
            o.max("g_d_ratio", r.g_d_ratio());
            o.max("b_d_ratio", r.b_d_ratio());
            o.max("reconstruction", r.reconstruction / scale);
            o.max("mean_zero", r.mean_zero / scale);
            o.max("disjointness", r.disjointness);
            o.max("projection_defect", r.projection_defect);
        }
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("cz-good-diagonal-2^n-lambda", "g_d_excess", SLACK),
            check("cz-bad-diagonal-constant-2", "b_d_excess", SLACK),
            check("cz-reconstruction", "reconstruction", EXACT),
            check("cz-bad-mean-zero", "mean_zero", EXACT),
            check("cz-disjoint-projections", "disjointness", EXACT),
            check("cz-projections", "projection_defect", EXACT),
        ],
        Vec::new(),
    ))
}

pub fn zeta(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = grid_filtration(cfg)?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_positive_martingale(rng, &filt)?.top().clone();
        let mut o = Outcome::new(InputDigest::new("zeta").operator(&f).finish());
        for e in cfg.lambda_exp.iter() {
            let r = zeta_verify(&zeta_data(&filt, &f, 2f64.powi(e))?)?;
            o.max("weak_excess", r.weak_mass - r.bound);
            o.max("weak_ratio", r.ratio());
            o.max("inequality_defect", -r.weak_min_eig);
            o.max("strong_inequality_defect", -r.strong_min_eig);
            o.max("order_defect", r.order_defect);
        }
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("zeta-weak-type-9^n", "weak_excess", SLACK),
            check("zeta-below-xi-on-9Q", "inequality_defect", SLACK),
            check("zeta-below-each-level", "order_defect", SLACK),
        ],
        Vec::new(),
    ))
}

pub fn thm_b1(cfg: &ExperimentConfig) -> Result<Report> {
    let filt = grid_filtration(cfg)?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_positive_martingale(rng, &filt)?.top().clone();
        let members = (0..cfg.components)
            .map(|_| random_operator(rng, filt.trace_functional()))
            .collect::<Result<Vec<_>>>()?;
        let mut d = InputDigest::new("thmB1");
        d.operator(&f);
        for m in &members {
            d.operator(m);
        }
        let mut o = Outcome::new(d.finish());
        let tf = OperatorFamily::new(members).map_err(HarnessError::from)?;
        let pi = zeta_meets(&filt, &f, cfg.lambda_exp.0)?;
        o.set("completeness_defect", pi.completeness_defect());
        let parts = thm_b1_decompose(&tf, pi)?;
        o.set("reconstruction", 0.0);
        for (m, x) in tf.members().iter().enumerate() {
            let sum = &(&parts.psi_part.members()[m] + &parts.a.members()[m]) + &parts.b.members()[m];
            o.max("reconstruction", (&sum - x).frobenius() / x.frobenius());
        }
        o.set("absorption", 0.0);
        for l in parts.pi.l_min()..=parts.pi.l_max() {
            o.max("absorption", absorption_defect(&parts, &tf, l)?);
        }
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("b1-reconstruction", "reconstruction", EXACT),
            check("b1-absorption", "absorption", EXACT),
            check("b1-pi-complete", "completeness_defect", SLACK),
        ],
        Vec::new(),
    ))
}
