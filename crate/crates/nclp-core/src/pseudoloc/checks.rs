//! Measurements behind pseudo-localization: the sets `Sigma_{f,s}`, the
//! commutative and semicommutative localization ratios, the kernel of
//! `E_k T Delta_{k+s}`, Schur integrals, paraproducts and the localization estimate.

use std::collections::BTreeSet;

use super::discop::{
    diff_vec, entry_norms, expect_rows, expect_vec, lambda_sk, phi_s, psi_s, DiscOp, RMat, RVec,
};
use crate::czkit::WindowCuculescu;
use crate::error::{Error, Result};
use crate::filtration::Grid;
use crate::opcore::{op_norm, proj_meet, spectral_projection, CMat, Interval, Operator, Projection};

const SUPPORT_CUT: f64 = 1e-9;

fn l2(grid: &Grid, v: &RVec) -> f64 {
    (v.norm_squared() * grid.cell_measure()).sqrt()
}

fn l2_family(grid: &Grid, vs: &[RVec]) -> f64 {
    (vs.iter().map(|v| v.norm_squared()).sum::<f64>() * grid.cell_measure()).sqrt()
}

/// `Omega_k` for `k = -s..=K-s` and `Sigma = union of 9 Omega_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaSet {
    /// `(k, Omega_k)` as cell indicators.
    pub omegas: Vec<(i32, Vec<bool>)>,
    pub sigma: Vec<bool>,
}

impl SigmaSet {
    pub fn measure(&self, grid: &Grid) -> f64 {
        self.sigma.iter().filter(|&&b| b).count() as f64 * grid.cell_measure()
    }
}

fn dilate(grid: &Grid, level: usize, cells: &[bool]) -> Result<Vec<bool>> {
    let mut cubes = BTreeSet::new();
    for (x, _) in cells.iter().enumerate().filter(|(_, &b)| b) {
        cubes.insert(grid.cube_of(x, level));
    }
    let mut out = vec![false; grid.cells()];
    for q in cubes {
        for x in q.concentric_father(grid, 9)? {
            out[x] = true;
        }
    }
    Ok(out)
}

/// Smallest union of level-`k` cubes containing the support of `df_{k+s}`,
/// and the union of the 9-fold dilations. Negative `k` stands for the whole torus.
pub fn sigma_set(grid: &Grid, f: &RVec, s: usize) -> Result<SigmaSet> {
    check_shift(grid, s)?;
    let tol = 1e-12 * f.amax().max(f64::MIN_POSITIVE);
    let mut omegas = Vec::new();
    let mut sigma = vec![false; grid.cells()];
    for j in 0..=grid.depth {
        let k = j as i32 - s as i32;
        let d = diff_vec(grid, f, j);
        let support: Vec<bool> = d.iter().map(|v| v.abs() > tol).collect();
        let (omega, dilated) = if k < 0 {
            let any = support.iter().any(|&b| b);
            (vec![any; grid.cells()], vec![any; grid.cells()])
        } else {
            let lab: Vec<usize> = (0..grid.cells()).map(|x| grid.cube_index(x, k as usize)).collect();
            let hit: BTreeSet<usize> = support.iter().enumerate().filter(|(_, &b)| b).map(|(x, _)| lab[x]).collect();
            let omega: Vec<bool> = lab.iter().map(|l| hit.contains(l)).collect();
            let dilated = dilate(grid, k as usize, &omega)?;
            (omega, dilated)
        };
        for (a, b) in sigma.iter_mut().zip(&dilated) {
            *a |= b;
        }
        omegas.push((k, omega));
    }
    Ok(SigmaSet { omegas, sigma })
}

fn check_shift(grid: &Grid, s: usize) -> Result<()> {
    if s == 0 || s >= grid.depth {
        return Err(Error::contract(format!("shift s = {s} must satisfy 1 <= s < K = {}", grid.depth)));
    }
    Ok(())
}

/// `s 2^{-gamma s / 2}`.
pub fn decay_rate(s: usize, gamma: f64) -> f64 {
    s as f64 * 2f64.powf(-gamma * s as f64 / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudolocReport {
    /// Localized norm of `T f` (compressed by `zeta` in the matrix case).
    pub localized: f64,
    pub f_l2: f64,
    /// `localized / (s 2^{-gamma s/2} ||f||_2)`.
    pub ratio: f64,
    /// Measure of `Sigma` (or `phi(1 - zeta)`).
    pub excluded: f64,
    /// `max ||[T f - (Phi_s + Psi_s) f]||` on the localized region.
    pub identity_defect: f64,
}

fn ratio_of(localized: f64, s: usize, gamma: f64, f_l2: f64) -> f64 {
    if f_l2 == 0.0 {
        0.0
    } else {
        localized / (decay_rate(s, gamma) * f_l2)
    }
}

/// `Phi_s + Psi_s`, reusable across test functions.
pub fn dyadic_pieces(op: &DiscOp, s: usize) -> Result<DiscOp> {
    phi_s(op, s)?.add(&psi_s(op, s)?)
}

/// `||1_{torus - Sigma} T f||_2` against `s 2^{-gamma s/2} ||f||_2`; `op` should have norm 1.
pub fn commutative_pseudoloc_check(op: &DiscOp, f: &RVec, s: usize, gamma: f64) -> Result<PseudolocReport> {
    commutative_pseudoloc_check_with(op, &dyadic_pieces(op, s)?, f, s, gamma)
}

/// As [`commutative_pseudoloc_check`] with `Phi_s + Psi_s` supplied.
pub fn commutative_pseudoloc_check_with(
    op: &DiscOp,
    pieces: &DiscOp,
    f: &RVec,
    s: usize,
    gamma: f64,
) -> Result<PseudolocReport> {
    let grid = op.grid();
    let sigma = sigma_set(&grid, f, s)?;
    let outside: Vec<usize> = (0..grid.cells()).filter(|&x| !sigma.sigma[x]).collect();
    let tf = op.apply(f);
    let pieces = pieces.apply(f);
    let mut localized = 0.0;
    let mut defect: f64 = 0.0;
    for (t, p) in tf.iter().zip(&pieces) {
        for &x in &outside {
            localized += t[x] * t[x];
            defect = defect.max((t[x] - p[x]).abs());
        }
    }
    let localized = (localized * grid.cell_measure()).sqrt();
    let f_l2 = l2(&grid, f);
    Ok(PseudolocReport {
        localized,
        f_l2,
        ratio: ratio_of(localized, s, gamma, f_l2),
        excluded: sigma.measure(&grid),
        identity_defect: defect,
    })
}

/// Projections `q_k` for `k = first..`, the identity outside the stored range.
/// Levels `k < 0` are constant over the grid.
#[derive(Clone, Debug)]
pub struct ShiftProjections {
    first: i32,
    levels: Vec<Projection>,
}

impl ShiftProjections {
    pub fn new(first: i32, levels: Vec<Projection>) -> Result<Self> {
        for (i, q) in levels.iter().enumerate() {
            let k = first + i as i32;
            let blocks = q.as_operator().blocks();
            if k < 0 && blocks.iter().any(|b| (b - &blocks[0]).norm() > 1e-12) {
                return Err(Error::contract(format!("q_{k} must be constant over the grid")));
            }
        }
        Ok(ShiftProjections { first, levels })
    }

    /// `q_k` from a Calderón–Zygmund run, for `k = k_min..=K - s`.
    pub fn from_cuculescu(cuc: &WindowCuculescu, s: usize) -> Result<Self> {
        let last = cuc.k_max() - s as i32;
        ShiftProjections::new(cuc.k_min(), (cuc.k_min()..=last).map(|k| cuc.q(k)).collect())
    }

    pub fn q(&self, k: i32, like: &Operator) -> Projection {
        if k < self.first {
            return Projection::identity(like.trace_functional());
        }
        self.levels
            .get((k - self.first) as usize)
            .cloned()
            .unwrap_or_else(|| Projection::identity(like.trace_functional()))
    }
}

/// Cellwise `E_k` of matrix-valued blocks.
fn expect_blocks(grid: &Grid, blocks: &[CMat], level: usize) -> Vec<CMat> {
    let lab: Vec<usize> = (0..grid.cells()).map(|x| grid.cube_index(x, level)).collect();
    let count = lab.iter().max().map_or(0, |m| m + 1);
    let per = (grid.cells() / count) as f64;
    let (r, c) = blocks[0].shape();
    let mut sums = vec![CMat::zeros(r, c); count];
    for (x, &l) in lab.iter().enumerate() {
        sums[l] += &blocks[x];
    }
    lab.iter().map(|&l| sums[l].unscale(per)).collect()
}

fn diff_blocks(grid: &Grid, blocks: &[CMat], level: usize) -> Vec<CMat> {
    let e = expect_blocks(grid, blocks, level);
    if level == 0 {
        return e;
    }
    let p = expect_blocks(grid, blocks, level - 1);
    e.iter().zip(&p).map(|(a, b)| a - b).collect()
}

/// `zeta_{f,s} = meet_k (1 - join_{Q in Q_k} (1 - xi_Q) 1_{9Q})` over `k = -s..=K-s`.
pub fn zeta_fs(grid: &Grid, qs: &ShiftProjections, s: usize, like: &Operator) -> Result<Projection> {
    let d = like.block(0).nrows();
    let one = CMat::identity(d, d);
    let mut parts = Vec::new();
    for k in -(s as i32)..=(grid.depth as i32 - s as i32) {
        let q = qs.q(k, like);
        if k < 0 {
            parts.push(q);
            continue;
        }
        let mut acc = vec![CMat::zeros(d, d); grid.cells()];
        for cube in grid.cubes(k as usize) {
            let first = cube.cells(grid)[0];
            let gap = &one - q.as_operator().block(first);
            if gap.norm() <= 1e-14 {
                continue;
            }
            for x in cube.concentric_father(grid, 9)? {
                acc[x] += &gap;
            }
        }
        let h = Operator::from_blocks(acc)?.into_hermitian_unchecked();
        parts.push(spectral_projection(&h, Interval::above(SUPPORT_CUT))?.complement());
    }
    proj_meet(&parts.iter().collect::<Vec<_>>())
}

/// Semicommutative pseudo-localization: `||zeta T f zeta||_{L_2(A; H)}` against
/// `s 2^{-gamma s/2} ||f||_2`, after certifying `q_k df_{k+s} q_k = 0`.
pub fn nc_pseudoloc_check(
    op: &DiscOp,
    f: &Operator,
    s: usize,
    qs: &ShiftProjections,
    gamma: f64,
) -> Result<PseudolocReport> {
    check_shift(&op.grid(), s)?;
    nc_pseudoloc_check_with(op, &dyadic_pieces(op, s)?, f, s, qs, gamma)
}

/// As [`nc_pseudoloc_check`] with `Phi_s + Psi_s` supplied.
pub fn nc_pseudoloc_check_with(
    op: &DiscOp,
    pieces: &DiscOp,
    f: &Operator,
    s: usize,
    qs: &ShiftProjections,
    gamma: f64,
) -> Result<PseudolocReport> {
    let grid = op.grid();
    check_shift(&grid, s)?;
    if f.blocks().len() != grid.cells() {
        return Err(Error::contract("f must carry one block per grid cell"));
    }
    let scale = op_norm(f).max(f64::MIN_POSITIVE);
    for j in 0..=grid.depth {
        let k = j as i32 - s as i32;
        let q = qs.q(k, f);
        let d = Operator::from_blocks(diff_blocks(&grid, f.blocks(), j))?;
        let defect = op_norm(&d.sandwich(q.as_operator(), q.as_operator()));
        if defect > 1e-10 * scale {
            return Err(Error::contract(format!(
                "q_{k} does not certify the support of df_{j} (defect {defect:e})"
            )));
        }
    }
    let zeta = zeta_fs(&grid, qs, s, f)?;
    let z = zeta.as_operator();
    let tf = op.apply_blocks(f.blocks())?;
    let pieces = pieces.apply_blocks(f.blocks())?;
    let mut localized = 0.0;
    let mut defect: f64 = 0.0;
    for (t, p) in tf.into_iter().zip(pieces) {
        let t = Operator::from_blocks(t)?.sandwich(z, z);
        let p = Operator::from_blocks(p)?.sandwich(z, z);
        localized += t.l2_norm_sq();
        defect = defect.max(op_norm(&(&t - &p)));
    }
    let localized = localized.sqrt();
    let f_l2 = f.l2_norm();
    Ok(PseudolocReport {
        localized,
        f_l2,
        ratio: ratio_of(localized, s, gamma, f_l2),
        excluded: zeta.complement().measure(),
        identity_defect: defect,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KskReport {
    /// `max |assembled - <T psi, phi>|` over the sampled pairs, relative to `max(1, max |k_{s,k}|)`.
    pub residual: f64,
    pub max_entry: f64,
    /// `max ||k_{s,k}(x,y)|| 2^{gamma(k+s)} |x-y|^{n+gamma}` over sampled `y` outside `3 R_x`.
    pub size_constant: f64,
    /// Pairs with `y` in `R_x`, in `3R_x - R_x`, and outside `3R_x`.
    pub counts: [usize; 3],
}

/// Kernel of `E_k T Delta_{k+s}` checked against `<T(psi_{Q^_y}), phi_{R_x}>`.
pub fn ksk_check(op: &DiscOp, s: usize, k: usize, pairs: &[(usize, usize)], gamma: f64) -> Result<KskReport> {
    let grid = op.grid();
    let assembled = lambda_sk(op, s, k)?;
    let w = grid.cell_measure();
    let j = k + s;
    let n = grid.dim as f64;
    let mut residual: f64 = 0.0;
    let mut max_entry: f64 = 0.0;
    let mut size_constant: f64 = 0.0;
    let mut counts = [0usize; 3];
    for &(x, y) in pairs {
        if x >= grid.cells() || y >= grid.cells() {
            return Err(Error::contract("sample pair outside the grid"));
        }
        let qy = grid.cube_of(y, j);
        let father = qy.father()?;
        let q_cells = qy.cells(&grid);
        let f_cells = father.cells(&grid);
        let father_measure = f_cells.len() as f64 * w;
        let mut psi = RVec::zeros(grid.cells());
        let children = (1usize << grid.dim) as f64;
        for &z in &f_cells {
            psi[z] -= 1.0 / father_measure;
        }
        for &z in &q_cells {
            psi[z] += children / father_measure;
        }
        let rx = grid.cube_of(x, k);
        let r_cells = rx.cells(&grid);
        let mut norm_sq = 0.0;
        for (a, t) in op.components().iter().zip(assembled.components()) {
            let tpsi = a * &psi;
            let oracle = r_cells.iter().map(|&c| tpsi[c]).sum::<f64>() / r_cells.len() as f64;
            let entry = t[(x, y)] / w;
            residual = residual.max((entry - oracle).abs());
            max_entry = max_entry.max(entry.abs());
            norm_sq += entry * entry;
        }
        let three: BTreeSet<usize> = rx.concentric_father(&grid, 3)?.into_iter().collect();
        if rx.contains_cell(&grid, y) {
            counts[0] += 1;
        } else if three.contains(&y) {
            counts[1] += 1;
        } else {
            counts[2] += 1;
            let dist = grid.distance(x, y);
            size_constant =
                size_constant.max(norm_sq.sqrt() * 2f64.powf(gamma * j as f64) * dist.powf(n + gamma));
        }
    }
    Ok(KskReport { residual: residual / max_entry.max(1.0), max_entry, size_constant, counts })
}

/// Schur integrals of `k_{s,k}`, maximized over `x` (resp. `y`) and `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurIntegrals {
    pub s: usize,
    pub s1: f64,
    pub s2: f64,
    /// `2^{gamma s} S^1 / s`.
    pub s1_normalized: f64,
    /// `S^2 / s`.
    pub s2_normalized: f64,
}

pub fn schur_integrals(op: &DiscOp, s: usize, gamma: f64) -> Result<SchurIntegrals> {
    let grid = op.grid();
    check_shift(&grid, s)?;
    let mut s1: f64 = 0.0;
    let mut s2: f64 = 0.0;
    for k in 0..=grid.depth - s {
        let e = entry_norms(&lambda_sk(op, s, k)?);
        s1 = s1.max(e.row_iter().map(|r| r.sum()).fold(0.0, f64::max));
        s2 = s2.max(e.column_iter().map(|c| c.sum()).fold(0.0, f64::max));
    }
    Ok(SchurIntegrals {
        s,
        s1,
        s2,
        s1_normalized: 2f64.powf(gamma * s as f64) * s1 / s as f64,
        s2_normalized: s2 / s as f64,
    })
}

/// `rho = T* 1`, one function per component.
pub fn t_star_one(op: &DiscOp) -> Vec<RVec> {
    op.components().iter().map(|a| a.row_sum().transpose()).collect()
}

/// `Pi_rho(f) = sum_{j=1}^K Delta_j(rho) E_{j-1}(f)`.
pub fn paraproduct(grid: &Grid, rho: &[RVec], f: &RVec) -> Vec<RVec> {
    rho.iter()
        .map(|r| {
            (1..=grid.depth).fold(RVec::zeros(grid.cells()), |acc, j| {
                acc + diff_vec(grid, r, j).component_mul(&expect_vec(grid, f, j - 1))
            })
        })
        .collect()
}

/// `Pi_rho*` as an operator `L_2 -> L_2(H)`: `f -> (sum_j E_{j-1}(Delta_j(rho_m) f))_m`.
pub fn paraproduct_adjoint_op(grid: &Grid, rho: &[RVec]) -> Result<DiscOp> {
    let n = grid.cells();
    let comps = rho
        .iter()
        .map(|r| {
            (1..=grid.depth).fold(RMat::zeros(n, n), |acc, j| {
                let d = diff_vec(grid, r, j);
                acc + expect_rows(grid, &RMat::from_diagonal(&d), j - 1)
            })
        })
        .collect();
    DiscOp::from_components(*grid, comps)
}

pub fn paraproduct_adjoint(grid: &Grid, rho: &[RVec], f: &RVec) -> Vec<RVec> {
    rho.iter()
        .map(|r| {
            (1..=grid.depth).fold(RVec::zeros(grid.cells()), |acc, j| {
                acc + expect_vec(grid, &diff_vec(grid, r, j).component_mul(f), j - 1)
            })
        })
        .collect()
}

/// `sup_Q (|Q|^{-1} int_Q ||rho - rho_Q||^2)^{1/2}` over dyadic cubes of levels `0..K`.
pub fn dyadic_bmo(grid: &Grid, rho: &[RVec]) -> f64 {
    let mut best: f64 = 0.0;
    for level in 0..grid.depth {
        let mut osc = RVec::zeros(grid.cells());
        for r in rho {
            let dev = r - expect_vec(grid, r, level);
            osc += dev.component_mul(&dev);
        }
        best = best.max(expect_vec(grid, &osc, level).max());
    }
    best.max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParaproductReport {
    pub paraproduct_l2: f64,
    pub bmo: f64,
    pub f_l2: f64,
}

impl ParaproductReport {
    /// `||Pi_rho f|| - BMO_d(R) ||f||`, nonpositive when the bound holds.
    pub fn excess(&self) -> f64 {
        self.paraproduct_l2 - self.bmo * self.f_l2
    }
}

pub fn paraproduct_check(grid: &Grid, rho: &[RVec], f: &RVec) -> ParaproductReport {
    ParaproductReport {
        paraproduct_l2: l2_family(grid, &paraproduct(grid, rho, f)),
        bmo: dyadic_bmo(grid, rho),
        f_l2: l2(grid, f),
    }
}

/// `max_{x outside Sigma} ||sum_k E_k Pi_rho* Delta_{k+s} f (x)||`.
pub fn vanish_check(grid: &Grid, rho: &[RVec], f: &RVec, s: usize) -> Result<f64> {
    let sigma = sigma_set(grid, f, s)?;
    let mut worst: f64 = 0.0;
    for r in rho {
        let mut acc = RVec::zeros(grid.cells());
        for k in 0..=grid.depth - s {
            let d = diff_vec(grid, f, k + s);
            let p = paraproduct_adjoint(grid, std::slice::from_ref(r), &d).remove(0);
            acc += expect_vec(grid, &p, k);
        }
        for x in (0..grid.cells()).filter(|&x| !sigma.sigma[x]) {
            worst = worst.max(acc[x].abs());
        }
    }
    Ok(worst)
}

/// `T - Pi_rho*` with `rho = T* 1`.
pub fn paraproduct_corrected(op: &DiscOp) -> Result<DiscOp> {
    let grid = op.grid();
    op.sub(&paraproduct_adjoint_op(&grid, &t_star_one(op))?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalizationReport {
    pub r1: f64,
    pub r2: f64,
    /// `||int T f g||_H`.
    pub value: f64,
    /// `value / (r1^n log(r2/r1))`.
    pub ratio: f64,
}

/// Cells of the l-infinity ball of radius `r` cells around the grid vertex `x0`.
fn vertex_ball(grid: &Grid, x0: [usize; 2], r: usize) -> Vec<bool> {
    let side = grid.side() as i64;
    (0..grid.cells())
        .map(|c| {
            let co = grid.coords(c);
            (0..grid.dim).all(|i| {
                // twice the offset of the midpoint from the vertex, wrapped
                let mut t = (2 * co[i] as i64 + 1 - 2 * x0[i] as i64).rem_euclid(2 * side);
                if t >= side {
                    t -= 2 * side;
                }
                t.abs() < 2 * r as i64
            })
        })
        .collect()
}

/// `f = 1_{B_{r1}(x0)}`, `g = 1_{B_{r2}(x0)}` restricted to the half space
/// right of `x0` along the first axis (a symmetric `g` pairs to zero against odd kernels).
pub fn localization_check(op: &DiscOp, x0: [usize; 2], r1: usize, r2: usize) -> Result<LocalizationReport> {
    let grid = op.grid();
    if r2 <= 2 * r1 || r1 == 0 {
        return Err(Error::contract(format!("need r2 > 2 r1 > 0, got r1 = {r1}, r2 = {r2} cells")));
    }
    if 2 * r2 > grid.side() {
        return Err(Error::contract("the outer ball must fit in the torus"));
    }
    let f_set = vertex_ball(&grid, x0, r1);
    let g_set = vertex_ball(&grid, x0, r2);
    let side = grid.side();
    let f = RVec::from_fn(grid.cells(), |c, _| if f_set[c] { 1.0 } else { 0.0 });
    let g = RVec::from_fn(grid.cells(), |c, _| {
        let right = (grid.coords(c)[0] + side - x0[0]) % side < side / 2;
        if g_set[c] && right {
            1.0
        } else {
            0.0
        }
    });
    let value = op
        .apply(&f)
        .iter()
        .map(|t| (t.dot(&g) * grid.cell_measure()).powi(2))
        .sum::<f64>()
        .sqrt();
    let h = grid.cell_size();
    let (r1, r2) = (r1 as f64 * h, r2 as f64 * h);
    Ok(LocalizationReport { r1, r2, value, ratio: value / (r1.powi(grid.dim as i32) * (r2 / r1).ln()) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayRow {
    pub s: usize,
    pub phi: f64,
    pub psi: f64,
    /// `s 2^{-gamma s/2}`.
    pub rate: f64,
}

/// `||Phi_s||` for the paraproduct-corrected operator and `||Psi_s||`.
pub fn decay_profile(op: &DiscOp, shifts: &[usize], gamma: f64) -> Result<Vec<DecayRow>> {
    let corrected = paraproduct_corrected(op)?;
    shifts
        .iter()
        .map(|&s| {
            Ok(DecayRow { s, phi: phi_s(&corrected, s)?.norm(), psi: psi_s(op, s)?.norm(), rate: decay_rate(s, gamma) })
        })
        .collect()
}

/// Least-squares slope of `log2(y)` against `x`; `None` if fewer than two positive points.
pub fn log2_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, y)| *y > 0.0).map(|&(x, y)| (x, y.log2())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
