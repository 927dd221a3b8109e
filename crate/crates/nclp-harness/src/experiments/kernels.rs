//! Suites on discretized Calderón–Zygmund operators over the dyadic torus.

use nalgebra::DVector;
use nclp_core::czkit::{cz_decompose, g_off_layers};
use nclp_core::filtration::{build_filtration, Grid};
use nclp_core::martingale::function_bmo_cells;
use nclp_core::opcore::{op_norm, CMat, Operator, Projection, C64};
use nclp_core::pseudoloc::{
    annuli, assemble, commutative_pseudoloc_check_with, cotlar_bound, decay_profile, dyadic_pieces, expect_vec,
    ksk_check, lambda_sk, localization_check, log2_slope, nc_pseudoloc_check_with, paraproduct_check, phi_s,
    psi_s, schur_bound, schur_integrals, sigma_set, t_star_one, vanish_check, DecayRow, DiscOp, HilbertKernel,
    RMat, RVec, ShiftProjections,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check, finish, run_trials, worst, Outcome, EXACT};
use crate::config::{ExperimentConfig, KernelChoice};
use crate::instances::{gaussian_vector, random_positive_martingale, InputDigest};
use crate::report::{Assertion, Report};
use crate::{HarnessError, Result};

/// Tolerance for identities between assembled operators.
const ASSEMBLY: f64 = 1e-9;
/// Pairs sampled per `k_{s,k}` trial.
const KSK_PAIRS: usize = 200;

/// The configured kernel, assembled and scaled to norm 1.
fn operator(cfg: &ExperimentConfig, grid: Grid) -> Result<DiscOp> {
    let op = match cfg.kernel {
        KernelChoice::LpBumps => {
            assemble(&HilbertKernel::lp_bumps(grid.dim, cfg.components, cfg.gamma)?, grid, 0.0)?
        }
        KernelChoice::Hilbert => assemble(&HilbertKernel::hilbert(), grid, 0.0)?,
        KernelChoice::Annuli => annuli(grid)?,
    };
    Ok(op.normalized()?)
}

fn shifts_below_depth(cfg: &ExperimentConfig, grid: &Grid) -> Result<Vec<usize>> {
    let shifts = cfg.shifts()?;
    if let Some(bad) = shifts.iter().find(|&&s| s >= grid.depth) {
        return Err(HarnessError::Usage(format!("shift {bad} must stay below the grid depth {}", grid.depth)));
    }
    Ok(shifts)
}

fn l2(grid: &Grid, v: &RVec) -> f64 {
    (v.norm_squared() * grid.cell_measure()).sqrt()
}

/// `(id - E_{J-1})(g 1_Q)` with `Q` a random dyadic cube and `J` a random finer level.
fn localized_function(rng: &mut ChaCha8Rng, grid: &Grid) -> RVec {
    let level = rng.random_range(1..grid.depth);
    let fine = rng.random_range(level + 1..=grid.depth);
    let cell = rng.random_range(0..grid.cells());
    let g = gaussian_vector(rng, grid.cells());
    let mut h = RVec::zeros(grid.cells());
    for x in grid.cube_of(cell, level).cells(grid) {
        h[x] = g[x];
    }
    &h - expect_vec(grid, &h, fine - 1)
}

fn random_dense(rng: &mut ChaCha8Rng, grid: Grid, components: usize) -> Result<DiscOp> {
    let n = grid.cells();
    let comps = (0..components).map(|_| RMat::from_iterator(n, n, gaussian_vector(rng, n * n).iter().map(|v| v / n as f64))).collect();
    Ok(DiscOp::from_components(grid, comps)?)
}

fn slope_assertions(label: &str, points: &[(f64, f64)], gamma: f64) -> Vec<Assertion> {
    let slope = log2_slope(points).unwrap_or(f64::NAN);
    vec![
        Assertion::at_most(format!("{label}-slope-at-most"), slope, -gamma / 2.0 + 0.15),
        Assertion::at_most(format!("{label}-slope-at-least"), -slope, gamma / 2.0 + 0.15),
    ]
}

pub fn decay(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = cfg.grid()?;
    let op = operator(cfg, grid)?;
    let shifts = shifts_below_depth(cfg, &grid)?;
    let rows: Vec<DecayRow> = shifts
        .par_iter()
        .map(|&s| Ok(decay_profile(&op, &[s], cfg.gamma)?.remove(0)))
        .collect::<Result<_>>()?;
    let pieces: Vec<DiscOp> = shifts.par_iter().map(|&s| Ok(dyadic_pieces(&op, s)?)).collect::<Result<_>>()?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = localized_function(rng, &grid);
        let mut o = Outcome::new(InputDigest::new("pseudoloc-decay").reals(f.iter()).finish());
        let norm = l2(&grid, &f);
        for (&s, p) in shifts.iter().zip(&pieces) {
            let r = commutative_pseudoloc_check_with(&op, p, &f, s, cfg.gamma)?;
            o.set(&format!("ratio_s{s}"), r.ratio);
            o.max("pseudoloc_ratio", r.ratio);
            o.max("identity_defect", r.identity_defect / norm);
        }
        for r in &rows {
            o.set(&format!("phi_norm_s{}", r.s), r.phi);
            o.set(&format!("psi_norm_s{}", r.s), r.psi);
        }
        Ok(o)
    })?;
    let phi: Vec<(f64, f64)> = rows.iter().map(|r| (r.s as f64, r.phi)).collect();
    let psi: Vec<(f64, f64)> = rows.iter().map(|r| (r.s as f64, r.psi)).collect();
    let mut extra = slope_assertions("phi", &phi, cfg.gamma);
    extra.extend(slope_assertions("psi", &psi, cfg.gamma));
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("pseudoloc-ratio-envelope", "pseudoloc_ratio", cfg.envelope),
            check("pseudoloc-dyadic-identity", "identity_defect", ASSEMBLY),
        ],
        extra,
    ))
}

/// Per-shift domination numbers: `(||Phi_s|| - Schur, ||Phi_s|| - Cotlar,
/// max_k ||Lambda_{s,k}|| - Schur, ||Psi_s|| - Schur, S^1 normalized, S^2 normalized)`.
fn domination(op: &DiscOp, s: usize, gamma: f64) -> Result<[f64; 6]> {
    let grid = op.grid();
    let phi = phi_s(op, s)?;
    let norm = phi.norm();
    let family: Vec<DiscOp> = (0..=grid.depth - s).map(|k| lambda_sk(op, s, k)).collect::<nclp_core::Result<_>>()?;
    let pieces = family.iter().map(|t| t.norm() - schur_bound(t).bound).fold(f64::NEG_INFINITY, worst);
    let psi = psi_s(op, s)?;
    let si = schur_integrals(op, s, gamma)?;
    Ok([
        norm - schur_bound(&phi).bound,
        norm - cotlar_bound(&family)?.bound,
        pieces,
        psi.norm() - schur_bound(&psi).bound,
        si.s1_normalized,
        si.s2_normalized,
    ])
}

const DOMINATION_NAMES: [&str; 6] =
    ["phi_schur_gap", "phi_cotlar_gap", "lambda_schur_gap", "psi_schur_gap", "s1_normalized", "s2_normalized"];

pub fn ksk(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = cfg.grid()?;
    let op = operator(cfg, grid)?;
    let shifts = shifts_below_depth(cfg, &grid)?;
    let dom: Vec<[f64; 6]> = shifts.par_iter().map(|&s| domination(&op, s, cfg.gamma)).collect::<Result<_>>()?;
    let outcomes = run_trials(cfg, |_, rng| {
        let pick = rng.random_range(0..shifts.len());
        let s = shifts[pick];
        let k = rng.random_range(0..=grid.depth - s);
        let pairs: Vec<(usize, usize)> =
            (0..KSK_PAIRS).map(|_| (rng.random_range(0..grid.cells()), rng.random_range(0..grid.cells()))).collect();
        let mut d = InputDigest::new("ksk");
        d.real(s as f64).real(k as f64);
        for &(x, y) in &pairs {
            d.real(x as f64).real(y as f64);
        }
        let mut o = Outcome::new(d.finish());
        let r = ksk_check(&op, s, k, &pairs, cfg.gamma)?;
        o.set("s", s as f64);
        o.set("k", k as f64);
        o.set("residual", r.residual);
        o.set("size_constant", r.size_constant);
        o.set("pairs_far", r.counts[2] as f64);
        for (name, v) in DOMINATION_NAMES.iter().zip(dom[pick]) {
            o.set(name, v);
        }
        Ok(o)
    })?;
    let column = |i: usize| dom.iter().map(|d| d[i]).fold(f64::NEG_INFINITY, worst);
    let extra = vec![
        Assertion::at_most("schur-dominates-phi", column(0), 1e-6),
        Assertion::at_most("cotlar-dominates-phi", column(1), 1e-6),
        Assertion::at_most("schur-dominates-lambda", column(2), 1e-6),
        Assertion::at_most("schur-dominates-psi", column(3), 1e-6),
        Assertion::at_most("schur-integral-s1-envelope", column(4), cfg.envelope),
        Assertion::at_most("schur-integral-s2-envelope", column(5), cfg.envelope),
    ];
    Ok(finish(cfg, outcomes, &[check("ksk-oracle", "residual", 1e-8)], extra))
}

pub fn paraproduct(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = cfg.grid()?;
    let outcomes = run_trials(cfg, |_, rng| {
        let rho: Vec<RVec> = (0..cfg.components).map(|_| gaussian_vector(rng, grid.cells())).collect();
        let f = gaussian_vector(rng, grid.cells());
        let mut d = InputDigest::new("paraproduct");
        for r in &rho {
            d.reals(r.iter());
        }
        let mut o = Outcome::new(d.reals(f.iter()).finish());
        let r = paraproduct_check(&grid, &rho, &f);
        o.set("paraproduct_norm", r.paraproduct_l2);
        o.set("bmo", r.bmo);
        o.set("excess", r.excess());
        o.set("ratio", r.paraproduct_l2 / (r.bmo * r.f_l2));
        Ok(o)
    })?;
    Ok(finish(cfg, outcomes, &[check("paraproduct-bmo-bound", "excess", 1e-8)], Vec::new()))
}

pub fn vanish(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = cfg.grid()?;
    let shifts = shifts_below_depth(cfg, &grid)?;
    let outcomes = run_trials(cfg, |_, rng| {
        let op = random_dense(rng, grid, cfg.components)?;
        let f = localized_function(rng, &grid);
        let s = shifts[rng.random_range(0..shifts.len())];
        let mut d = InputDigest::new("vanish");
        for a in op.components() {
            d.reals(a.iter());
        }
        let mut o = Outcome::new(d.reals(f.iter()).real(s as f64).finish());
        let rho = t_star_one(&op);
        o.set("s", s as f64);
        o.set("residual", vanish_check(&grid, &rho, &f, s)? / l2(&grid, &f));
        o.set("sigma_measure", sigma_set(&grid, &f, s)?.measure(&grid));
        Ok(o)
    })?;
    Ok(finish(cfg, outcomes, &[check("paraproduct-vanishes-off-sigma", "residual", EXACT)], Vec::new()))
}

pub fn localization(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = cfg.grid()?;
    let op = operator(cfg, grid)?;
    let side = grid.side();
    let outcomes = run_trials(cfg, |_, rng| {
        let x0 = [rng.random_range(0..side), if grid.dim == 2 { rng.random_range(0..side) } else { 0 }];
        let fits: Vec<usize> = [1usize, 2, 4].into_iter().filter(|r| 2 * 16 * r <= side).collect();
        if fits.is_empty() {
            return Err(HarnessError::Usage("grid too coarse for r2 = 16 r1".into()));
        }
        let r1 = fits[rng.random_range(0..fits.len())];
        let mut o = Outcome::new(InputDigest::new("localization").reals(&[x0[0] as f64, x0[1] as f64, r1 as f64]).finish());
        let near = localization_check(&op, x0, r1, 4 * r1)?;
        let far = localization_check(&op, x0, r1, 16 * r1)?;
        o.set("r1", near.r1);
        o.set("ratio_r2_4r1", near.ratio);
        o.set("ratio_r2_16r1", far.ratio);
        o.set("ratio", near.ratio.max(far.ratio));
        let lo = near.ratio.min(far.ratio);
        o.set("stability", if lo > 0.0 { near.ratio.max(far.ratio) / lo } else { f64::INFINITY });
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("localization-envelope", "ratio", cfg.envelope),
            check("localization-ratio-stable", "stability", 4.0),
        ],
        Vec::new(),
    ))
}

fn scalar_operator(f: &RVec) -> Result<Operator> {
    Ok(Operator::from_blocks(f.iter().map(|&v| CMat::from_element(1, 1, C64::new(v, 0.0))).collect())?)
}

fn indicator(on: impl Iterator<Item = bool>) -> Result<Projection> {
    let op = Operator::from_blocks(on.map(|b| CMat::from_element(1, 1, C64::new(if b { 1.0 } else { 0.0 }, 0.0))).collect())?;
    Ok(Projection::new(op.into_hermitian_unchecked())?)
}

pub fn nc_pseudoloc(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = cfg.grid()?;
    let filt = build_filtration(cfg.algebra.0)?;
    let op = operator(cfg, grid)?;
    let shifts = shifts_below_depth(cfg, &grid)?;
    let pieces: Vec<DiscOp> = shifts.par_iter().map(|&s| Ok(dyadic_pieces(&op, s)?)).collect::<Result<_>>()?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = random_positive_martingale(rng, &filt)?.top().clone();
        let e = rng.random_range(cfg.lambda_exp.0..=cfg.lambda_exp.1);
        let scalar = localized_function(rng, &grid);
        let mut o = Outcome::new(InputDigest::new("nc-pseudoloc").operator(&f).real(e as f64).reals(scalar.iter()).finish());
        let scale = op_norm(&f);
        let parts = cz_decompose(&filt, &f, 2f64.powi(e))?;
        let layers = g_off_layers(&parts);
        o.set("lambda_exp", e as f64);
        o.set("nc_ratio", 0.0);
        o.set("identity_defect", 0.0);
        o.set("layers_tested", 0.0);
        for (&s, p) in shifts.iter().zip(&pieces) {
            let Some(layer) = layers.layers.get(s - 1) else { continue };
            if layer.frobenius() <= 1e-12 * scale {
                continue;
            }
            let qs = ShiftProjections::from_cuculescu(&parts.cuculescu, s)?;
            let r = nc_pseudoloc_check_with(&op, p, layer, s, &qs, cfg.gamma)?;
            o.set(&format!("nc_ratio_s{s}"), r.ratio);
            o.max("nc_ratio", r.ratio);
            o.max("identity_defect", r.identity_defect / scale);
            *o.metrics.get_mut("layers_tested").expect("set above") += 1.0;
        }
        // scalar case: q_k = 1 - 1_{Omega_k}
        let g = scalar_operator(&scalar)?;
        o.set("scalar_reduction_gap", 0.0);
        for (&s, p) in shifts.iter().zip(&pieces) {
            let sigma = sigma_set(&grid, &scalar, s)?;
            let levels =
                sigma.omegas.iter().map(|(_, om)| indicator(om.iter().map(|b| !b))).collect::<Result<Vec<_>>>()?;
            let qs = ShiftProjections::new(sigma.omegas[0].0, levels)?;
            let nc = nc_pseudoloc_check_with(&op, p, &g, s, &qs, cfg.gamma)?;
            let c = commutative_pseudoloc_check_with(&op, p, &scalar, s, cfg.gamma)?;
            o.max("scalar_reduction_gap", (nc.localized - c.localized).abs());
        }
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("nc-pseudoloc-envelope", "nc_ratio", cfg.envelope),
            check("nc-pseudoloc-dyadic-identity", "identity_defect", ASSEMBLY),
            check("nc-scalar-reduction", "scalar_reduction_gap", ASSEMBLY),
        ],
        Vec::new(),
    ))
}

pub fn bmo_czo(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = cfg.grid()?;
    let op = operator(cfg, grid)?;
    let outcomes = run_trials(cfg, |_, rng| {
        let f = DVector::from_fn(grid.cells(), |_, _| rng.random_range(-1.0..=1.0));
        let mut o = Outcome::new(InputDigest::new("bmo-czo").reals(f.iter()).finish());
        let out = op.apply(&f);
        if cfg.kernel == KernelChoice::Annuli {
            let mean = f.mean();
            let centred = f.map(|v| v - mean);
            let energy: f64 = out.iter().map(|v| v.norm_squared()).sum::<f64>() * grid.cell_measure();
            o.set("annuli_identity", (energy - centred.norm_squared() * grid.cell_measure()).abs());
        }
        let cells: Vec<CMat> = (0..grid.cells())
            .map(|x| CMat::from_iterator(out.len(), 1, out.iter().map(|v| C64::new(v[x], 0.0))))
            .collect();
        let b = function_bmo_cells(&grid, &cells)?;
        o.set("bmo_row", b.row);
        o.set("bmo_col", b.col);
        o.set("bmo_over_linf", b.max() / f.amax());
        Ok(o)
    })?;
    Ok(finish(
        cfg,
        outcomes,
        &[
            check("annuli-energy-identity", "annuli_identity", EXACT),
            check("linf-to-bmo-envelope", "bmo_over_linf", cfg.envelope),
        ],
        Vec::new(),
    ))
}
