//! Calderón–Zygmund decomposition of positive grid functions, the dilated
//! projections `zeta(lambda)`, the layers of `g_off` and the split behind
//! noncommutative pseudo-localization.
//!
//! The grid is a unit window of `R^n` carrying `f`. Levels `k < 0` are the
//! ancestors of the window: `f_k = 2^{nk} f_0`, constant on the window. They run
//! down to `k_min`, where `2^{n k_min} ||f_0|| <= lambda` forces `q_{k_min} = 1`.

use crate::cuculescu::{delta_split, restricted_below, PiFamily};
use crate::error::{Error, Result};
use crate::filtration::{Filtration, Grid};
use crate::martingale::OperatorFamily;
use crate::opcore::{
    min_eigenvalue, op_norm, proj_meet, schatten_norm, spectral_projection, CMat, Interval, Operator, Projection,
};

const SUPPORT_CUT: f64 = 1e-9;

/// Cuculescu projections over `k_min..=K`, ancestors broadcast over the window.
#[derive(Clone, Debug)]
pub struct WindowCuculescu {
    lambda: f64,
    dim: usize,
    k_min: i32,
    m_lambda: i32,
    grid: Grid,
    f_levels: Vec<Operator>,
    q_levels: Vec<Projection>,
}

fn grid_of(filt: &Filtration) -> Result<Grid> {
    filt.grid().ok_or_else(|| Error::contract("the CZ decomposition needs a grid filtration"))
}

fn broadcast(m: &CMat, cells: usize) -> Result<Operator> {
    Operator::from_blocks(vec![m.clone(); cells])
}

fn is_identity(q: &Projection) -> bool {
    q.complement().measure() < 0.5 / q.as_operator().dim() as f64
}

impl WindowCuculescu {
    pub fn new(filt: &Filtration, f: &Operator, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::contract(format!("lambda must be positive, got {lambda}")));
        }
        let grid = grid_of(filt)?;
        if f.trace_functional() != filt.trace_functional() {
            return Err(Error::contract("f does not live on the filtration's grid"));
        }
        let f = f.clone().into_hermitian()?;
        if min_eigenvalue(&f)? < -1e-10 * op_norm(&f).max(1.0) {
            return Err(Error::contract("the CZ decomposition needs a positive function"));
        }
        let dim = grid.dim;
        let cells = grid.cells();
        let mean = filt.cond_expect(&f, 0)?.block(0).clone();
        let mean_norm = op_norm(&Operator::from_matrix(mean.clone())?);
        let mut k_min = -1i32;
        while 2f64.powi(dim as i32 * k_min) * mean_norm > lambda {
            k_min -= 1;
        }

        let mut f_levels = Vec::new();
        let mut q_levels = Vec::new();
        // ancestors on a single block
        let mut prev = Projection::identity(Operator::from_matrix(mean.clone())?.trace_functional());
        for k in k_min..0 {
            let fk = Operator::from_matrix(&mean * crate::opcore::C64::new(2f64.powi(dim as i32 * k), 0.0))?;
            let q = restricted_below(&prev, &fk, lambda)?;
            f_levels.push(broadcast(fk.block(0), cells)?.into_hermitian_unchecked());
            q_levels.push(Projection::new(broadcast(q.as_operator().block(0), cells)?.into_hermitian_unchecked())?);
            prev = q;
        }
        let mut prev = q_levels.last().cloned().unwrap_or_else(|| Projection::identity(f.trace_functional()));
        for k in filt.levels() {
            let fk = filt.cond_expect(&f, k)?;
            let q = restricted_below(&prev, &fk, lambda)?;
            f_levels.push(fk);
            q_levels.push(q.clone());
            prev = q;
        }
        let m_lambda = q_levels
            .iter()
            .enumerate()
            .filter(|(_, q)| is_identity(q))
            .map(|(i, _)| k_min + i as i32)
            .max()
            .unwrap_or(k_min - 1);
        Ok(WindowCuculescu { lambda, dim, k_min, m_lambda, grid, f_levels, q_levels })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Lowest stored level; everything below it has `q = 1`.
    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.q_levels.len() as i32 - 1
    }

    /// Largest level with `q_k = 1`.
    pub fn m_lambda(&self) -> i32 {
        self.m_lambda
    }

    fn slot(&self, k: i32) -> Option<usize> {
        (k >= self.k_min && k <= self.k_max()).then(|| (k - self.k_min) as usize)
    }

    /// `q_k`; the identity below `k_min`, `q_K` above the top.
    pub fn q(&self, k: i32) -> Projection {
        match self.slot(k) {
            Some(i) => self.q_levels[i].clone(),
            None if k < self.k_min => Projection::identity(self.q_levels[0].trace_functional()),
            None => self.q_levels.last().unwrap().clone(),
        }
    }

    /// `f_k` for `k_min <= k <= K`; `f_{k_min - 1} = 2^{-n} f_{k_min}`, and `f` above the top.
    pub fn f(&self, k: i32) -> Operator {
        match self.slot(k) {
            Some(i) => self.f_levels[i].clone(),
            None if k < self.k_min => {
                self.f_levels[0].scale_real(2f64.powi(self.dim as i32 * (k - self.k_min)))
            }
            None => self.f_levels.last().unwrap().clone(),
        }
    }

    pub fn df(&self, k: i32) -> Operator {
        if k > self.k_max() {
            return self.f_levels[0].zero_like();
        }
        &self.f(k) - &self.f(k - 1)
    }

    /// `p_k = q_{k-1} - q_k`.
    pub fn p(&self, k: i32) -> Operator {
        (self.q(k - 1).as_operator() - self.q(k).as_operator()).into_hermitian_unchecked()
    }

    /// `q = q_K`.
    pub fn q_final(&self) -> Projection {
        self.q_levels.last().unwrap().clone()
    }

    /// Block `xi_Q` of `q_k` on the level-`k` cube containing `cell`; ancestors are constant.
    pub fn xi(&self, k: i32, cell: usize) -> CMat {
        self.q(k).as_operator().block(cell).clone()
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        self.k_min..=self.k_max()
    }
}

/// `f = g_d + g_off + b_d + b_off`.
#[derive(Clone, Debug)]
pub struct CZParts {
    pub g_d: Operator,
    pub g_off: Operator,
    pub b_d: Operator,
    pub b_off: Operator,
    /// `b_{d,k} = p_k (f - f_k) p_k`, indexed from `k_min`.
    pub b_d_terms: Vec<Operator>,
    pub cuculescu: WindowCuculescu,
}

pub fn cz_decompose(filt: &Filtration, f: &Operator, lambda: f64) -> Result<CZParts> {
    let cuc = WindowCuculescu::new(filt, f, lambda)?;
    let f = cuc.f(cuc.k_max() + 1);
    let q = cuc.q_final();
    let qc = q.complement();
    let levels: Vec<i32> = cuc.levels().collect();
    let ps: Vec<Operator> = levels.iter().map(|&k| cuc.p(k)).collect();
    let active: Vec<bool> = ps.iter().map(|p| p.frobenius() > 1e-12).collect();

    let mut g_d = f.sandwich(q.as_operator(), q.as_operator());
    let mut b_d = f.zero_like();
    let mut b_d_terms = Vec::with_capacity(levels.len());
    for (i, &k) in levels.iter().enumerate() {
        let fk = cuc.f(k);
        g_d = &g_d + &fk.sandwich(&ps[i], &ps[i]);
        let t = (&f - &fk).sandwich(&ps[i], &ps[i]);
        b_d = &b_d + &t;
        b_d_terms.push(t);
    }

    let mut g_off = &f.sandwich(q.as_operator(), qc.as_operator()) + &f.sandwich(qc.as_operator(), q.as_operator());
    let mut b_off = f.zero_like();
    for (i, &ki) in levels.iter().enumerate() {
        if !active[i] {
            continue;
        }
        for (j, &kj) in levels.iter().enumerate() {
            if i == j || !active[j] {
                continue;
            }
            let fij = cuc.f(ki.max(kj));
            g_off = &g_off + &fij.sandwich(&ps[i], &ps[j]);
            b_off = &b_off + &(&f - &fij).sandwich(&ps[i], &ps[j]);
        }
    }
    Ok(CZParts {
        g_d: g_d.into_hermitian_unchecked(),
        g_off: g_off.into_hermitian_unchecked(),
        b_d: b_d.into_hermitian_unchecked(),
        b_off: b_off.into_hermitian_unchecked(),
        b_d_terms,
        cuculescu: cuc,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CzReport {
    /// `||f - (g_d + g_off + b_d + b_off)||_inf`.
    pub reconstruction: f64,
    pub g_d_l2_sq: f64,
    /// `2^n lambda ||f||_1`.
    pub g_d_bound: f64,
    pub b_d_l1_sum: f64,
    /// `2 ||f||_1`.
    pub b_d_bound: f64,
    /// `max_{k >= 0} ||E_k(b_{d,k})||_inf`; ancestor terms have their mean outside the window.
    pub mean_zero: f64,
    /// `max_{i != j} ||p_i p_j||_inf`.
    pub disjointness: f64,
    /// `max_k ||p_k^2 - p_k||_inf`.
    pub projection_defect: f64,
    pub f_l1: f64,
}

impl CzReport {
    pub fn g_d_ratio(&self) -> f64 {
        ratio(self.g_d_l2_sq, self.g_d_bound)
    }

    pub fn b_d_ratio(&self) -> f64 {
        ratio(self.b_d_l1_sum, self.b_d_bound)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

pub fn cz_verify(filt: &Filtration, parts: &CZParts) -> Result<CzReport> {
    let cuc = &parts.cuculescu;
    let f = cuc.f(cuc.k_max() + 1);
    let sum = &(&(&parts.g_d + &parts.g_off) + &parts.b_d) + &parts.b_off;
    let f_l1 = schatten_norm(&f, 1.0)?;
    let b_d_l1_sum = parts.b_d_terms.iter().map(|t| schatten_norm(t, 1.0)).sum::<Result<f64>>()?;
    let mut mean_zero: f64 = 0.0;
    for (k, t) in cuc.levels().zip(&parts.b_d_terms) {
        if k >= 0 {
            mean_zero = mean_zero.max(op_norm(&filt.cond_expect(t, k as usize)?));
        }
    }
    let ps: Vec<Operator> = cuc.levels().map(|k| cuc.p(k)).collect();
    let mut disjointness: f64 = 0.0;
    let mut projection_defect: f64 = 0.0;
    for (i, a) in ps.iter().enumerate() {
        projection_defect = projection_defect.max(op_norm(&(&(a * a) - a)));
        for b in &ps[i + 1..] {
            disjointness = disjointness.max(op_norm(&(a * b)));
        }
    }
    Ok(CzReport {
        reconstruction: op_norm(&(&f - &sum)),
        g_d_l2_sq: parts.g_d.l2_norm_sq(),
        g_d_bound: 2f64.powi(cuc.dim as i32) * cuc.lambda * f_l1,
        b_d_l1_sum,
        b_d_bound: 2.0 * f_l1,
        mean_zero,
        disjointness,
        projection_defect,
        f_l1,
    })
}

/// `g_off = sum_s g_(s)` with `g_(s) = sum_k g_{k,s}`.
#[derive(Clone, Debug)]
pub struct GOffLayers {
    /// `g_(s)` for `s = 1..`, index `s - 1`.
    pub layers: Vec<Operator>,
    /// `sum_k ||g_{k,s}||_2^2` per layer.
    pub term_l2_sq: Vec<f64>,
    /// `max_{k,s} ||(1 - p_k) g_{k,s} (1 - p_k)||_inf`.
    pub support_defect: f64,
}

pub fn g_off_layers(parts: &CZParts) -> GOffLayers {
    let cuc = &parts.cuculescu;
    let span = cuc.k_max() - cuc.k_min();
    let mut layers = Vec::new();
    let mut term_l2_sq = Vec::new();
    let mut support_defect: f64 = 0.0;
    let zero = parts.g_off.zero_like();
    let one = zero.identity_like();
    for s in 1..=span {
        let mut layer = zero.clone();
        let mut terms = 0.0;
        for k in cuc.k_min()..=cuc.k_max() - s {
            let p = cuc.p(k);
            if p.frobenius() <= 1e-12 {
                continue;
            }
            let q = cuc.q(k + s - 1);
            let d = cuc.df(k + s);
            let term = &d.sandwich(&p, q.as_operator()) + &d.sandwich(q.as_operator(), &p);
            let outside = &one - &p;
            support_defect = support_defect.max(op_norm(&term.sandwich(&outside, &outside)));
            terms += term.l2_norm_sq();
            layer = &layer + &term;
        }
        layers.push(layer.into_hermitian_unchecked());
        term_l2_sq.push(terms);
    }
    GOffLayers { layers, term_l2_sq, support_defect }
}

/// `psi_k`, `zeta_k = 1 - supp psi_k` for `k = m_lambda + 1..=K`, and their meet.
#[derive(Clone, Debug)]
pub struct ZetaData {
    pub psi: Vec<Operator>,
    pub zeta_levels: Vec<Projection>,
    pub zeta: Projection,
    pub cuculescu: WindowCuculescu,
}

impl ZetaData {
    pub fn lambda(&self) -> f64 {
        self.cuculescu.lambda()
    }

    /// Level of `psi[0]`.
    pub fn first_level(&self) -> i32 {
        self.cuculescu.m_lambda() + 1
    }
}

pub fn zeta(filt: &Filtration, f: &Operator, lambda: f64) -> Result<ZetaData> {
    zeta_from(WindowCuculescu::new(filt, f, lambda)?)
}

pub fn zeta_from(cuc: WindowCuculescu) -> Result<ZetaData> {
    let grid = cuc.grid();
    let cells = grid.cells();
    let d = cuc.xi(cuc.k_min(), 0).nrows();
    let mut acc = vec![CMat::zeros(d, d); cells];
    let mut psi = Vec::new();
    let mut zeta_levels = Vec::new();
    for k in cuc.m_lambda() + 1..=cuc.k_max() {
        if k < 0 {
            // an ancestor cube dilates over the whole window
            let jump = &cuc.xi(k - 1, 0) - &cuc.xi(k, 0);
            for b in acc.iter_mut() {
                *b += &jump;
            }
        } else {
            for cube in grid.cubes(k as usize) {
                let first = cube.cells(&grid)[0];
                let jump = &cuc.xi(k - 1, first) - &cuc.xi(k, first);
                if jump.norm() <= 1e-14 {
                    continue;
                }
                for x in cube.concentric_father(&grid, 9)? {
                    acc[x] += &jump;
                }
            }
        }
        let p = Operator::from_blocks(acc.clone())?.into_hermitian_unchecked();
        zeta_levels.push(spectral_projection(&p, Interval::above(SUPPORT_CUT))?.complement());
        psi.push(p);
    }
    let zeta = if zeta_levels.is_empty() {
        Projection::identity(cuc.q(0).trace_functional())
    } else {
        proj_meet(&zeta_levels.iter().collect::<Vec<_>>())?
    };
    Ok(ZetaData { psi, zeta_levels, zeta, cuculescu: cuc })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaReport {
    /// `lambda phi(1 - zeta)`.
    pub weak_mass: f64,
    /// `9^n ||f||_1`.
    pub bound: f64,
    /// Smallest eigenvalue of `(1 - xi_{Q^} + xi_Q) - zeta(x)` over `x in 9Q`, all `Q`.
    pub strong_min_eig: f64,
    /// Smallest eigenvalue of `xi_Q - zeta(x)` over `x in 9Q`, all `Q`.
    pub weak_min_eig: f64,
    /// `max_k ||zeta - zeta zeta_k||_inf`, zero iff `zeta <= zeta_k`.
    pub order_defect: f64,
}

impl ZetaReport {
    pub fn ratio(&self) -> f64 {
        ratio(self.weak_mass, self.bound)
    }
}

fn block_min_eig(m: &CMat) -> Result<f64> {
    min_eigenvalue(&Operator::from_matrix(m.clone())?.into_hermitian_unchecked())
}

/// Both properties of the lemma, checked on every dyadic cube of levels
/// `k_min..=K` (ancestors dilate over the whole window).
pub fn zeta_verify(data: &ZetaData) -> Result<ZetaReport> {
    let cuc = &data.cuculescu;
    let grid = cuc.grid();
    let f = cuc.f(cuc.k_max() + 1);
    let zeta = data.zeta.as_operator();
    let d = cuc.xi(cuc.k_min(), 0).nrows();
    let one = CMat::identity(d, d);
    let mut strong: f64 = f64::INFINITY;
    let mut weak: f64 = f64::INFINITY;
    let mut check = |xi: &CMat, parent: &CMat, cells: &[usize]| -> Result<()> {
        let strong_rhs = &(&one - parent) + xi;
        for &x in cells {
            let z = zeta.block(x);
            strong = strong.min(block_min_eig(&(&strong_rhs - z))?);
            weak = weak.min(block_min_eig(&(xi - z))?);
        }
        Ok(())
    };
    let all: Vec<usize> = (0..grid.cells()).collect();
    for k in cuc.k_min()..0 {
        check(&cuc.xi(k, 0), &cuc.xi(k - 1, 0), &all)?;
    }
    for k in 0..=cuc.k_max() {
        for cube in grid.cubes(k as usize) {
            let first = cube.cells(&grid)[0];
            check(&cuc.xi(k, first), &cuc.xi(k - 1, first), &cube.concentric_father(&grid, 9)?)?;
        }
    }
    let order_defect = data
        .zeta_levels
        .iter()
        .map(|z| op_norm(&(zeta - &(zeta * z.as_operator()))))
        .fold(0.0, f64::max);
    Ok(ZetaReport {
        weak_mass: cuc.lambda() * data.zeta.complement().measure(),
        bound: 9f64.powi(cuc.dim as i32) * schatten_norm(&f, 1.0)?,
        strong_min_eig: strong,
        weak_min_eig: weak,
        order_defect,
    })
}

/// `T f = psi T f psi + A f + B f`.
#[derive(Clone, Debug)]
pub struct ThmB1Parts {
    pub psi_part: OperatorFamily,
    pub a: OperatorFamily,
    pub b: OperatorFamily,
    /// Residual block `psi`, then `pi_k = w_k - w_{k-1}`.
    pub pi: PiFamily,
}

/// `w_k = meet_{s >= k} zeta(2^s)` for `s_min <= k`, up to the first `s` with `2^s > ||f||_inf`.
pub fn zeta_meets(filt: &Filtration, f: &Operator, s_min: i32) -> Result<PiFamily> {
    let norm = op_norm(f);
    if norm == 0.0 {
        return Ok(PiFamily::trivial(Projection::identity(f.trace_functional())));
    }
    let s_max = (norm.log2().floor() as i32 + 1).max(s_min);
    let mut meets = Vec::new();
    let mut acc: Option<Projection> = None;
    for s in (s_min..=s_max).rev() {
        let z = zeta(filt, f, 2f64.powi(s))?.zeta;
        let next = match acc {
            None => z,
            Some(w) => proj_meet(&[&w, &z])?,
        };
        meets.push(next.clone());
        acc = Some(next);
    }
    meets.reverse();
    PiFamily::from_meets(s_min, meets)
}

pub fn thm_b1_decompose(tf: &OperatorFamily, pi: PiFamily) -> Result<ThmB1Parts> {
    let psi = pi.residual().as_operator().clone();
    let mut psi_part = Vec::with_capacity(tf.len());
    let mut a = Vec::with_capacity(tf.len());
    let mut b = Vec::with_capacity(tf.len());
    for t in tf.members() {
        let (row, col) = delta_split(t, &pi);
        let inner = t.sandwich(&psi, &psi);
        a.push(&row - &inner);
        psi_part.push(inner);
        b.push(col);
    }
    Ok(ThmB1Parts {
        psi_part: OperatorFamily::new(psi_part)?,
        a: OperatorFamily::new(a)?,
        b: OperatorFamily::new(b)?,
        pi,
    })
}

/// `max_m ||w_l A_m - sum_{i<=l} pi_i (w_l T_m w_l) rho_i||_inf`, with
/// `rho_i = psi + sum_{j<=i} pi_j` over the non-residual blocks.
pub fn absorption_defect(parts: &ThmB1Parts, tf: &OperatorFamily, l: i32) -> Result<f64> {
    let w = parts.pi.w(l)?;
    let w = w.as_operator();
    let mut rho = parts.pi.residual().as_operator().clone();
    let mut terms: Vec<(Operator, Operator)> = Vec::new();
    for (i, p) in parts.pi.blocks().skip(1) {
        rho = &rho + p.as_operator();
        if i <= l {
            terms.push((p.as_operator().clone(), rho.clone()));
        }
    }
    let mut worst: f64 = 0.0;
    for (t, a) in tf.members().iter().zip(parts.a.members()) {
        let inner = t.sandwich(w, w);
        let rhs = terms.iter().fold(t.zero_like(), |acc, (p, r)| &acc + &inner.sandwich(p, r));
        worst = worst.max(op_norm(&(&(w * a) - &rhs)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
