//! Gundy's decomposition, the row/column split behind the weak type (1,1)
//! estimate, ergodic-average coefficients and cross terms.

use nalgebra::DMatrix;

use crate::cuculescu::{cuculescu, delta_split, delta_trunc, pi_family, CuculescuSequence, PiFamily};
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::martingale::{col_square, row_square, transform_family, CoeffMatrix, Martingale, OperatorFamily};
use crate::opcore::{
    annihilation_check, min_eigenvalue, op_norm, schatten_norm, tail_trace, weak_l1, CMat, Operator, Projection, C64,
};

/// `f = alpha + beta + gamma`, stored through the difference sequences.
#[derive(Clone, Debug)]
pub struct GundyParts {
    pub alpha: Martingale,
    pub beta: Martingale,
    pub gamma: Martingale,
    pub d_alpha: Vec<Operator>,
    pub d_beta: Vec<Operator>,
    pub d_gamma: Vec<Operator>,
    pub sequence: CuculescuSequence,
}

pub fn gundy(f: &Martingale, lambda: f64) -> Result<GundyParts> {
    let sequence = cuculescu(f, lambda)?;
    let filt = f.filtration();
    let diffs = f.differences();
    let n = diffs.len();
    let (mut da, mut db, mut dg) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (k, d) in diffs.iter().enumerate() {
        let q = sequence.at(k as isize);
        let q_prev = sequence.at(k as isize - 1);
        let inner = d.sandwich(&q, &q);
        let mean = filt.cond_expect_or_zero(&inner, k as isize - 1)?;
        let outer = d.sandwich(&q_prev, &q_prev);
        da.push(&inner - &mean);
        db.push(&(&outer - &inner) + &mean);
        dg.push(d - &outer);
    }
    Ok(GundyParts {
        alpha: Martingale::from_differences_unchecked(filt, &da),
        beta: Martingale::from_differences_unchecked(filt, &db),
        gamma: Martingale::from_differences_unchecked(filt, &dg),
        d_alpha: da,
        d_beta: db,
        d_gamma: dg,
        sequence,
    })
}

/// The three Gundy quantities divided by `sup_n ||f_n||_1`, plus exactness checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GundyReport {
    /// `(1/lambda) sup_n ||alpha_n||_2^2 / S`.
    pub alpha_ratio: f64,
    /// `sum_k ||d beta_k||_1 / S`.
    pub beta_ratio: f64,
    /// `lambda tau(1 - q(lambda)) / S`, dominating the weak support of gamma.
    pub gamma_ratio: f64,
    /// `S = sup_n ||f_n||_1`.
    pub sup_l1: f64,
    /// `||f_top - (alpha + beta + gamma)_top||_2`.
    pub reconstruction: f64,
    /// Largest failure of the martingale property over the three parts.
    pub martingale_defect: f64,
    /// `max_k ||q(lambda) d gamma_k q(lambda)||`.
    pub gamma_annihilation: f64,
}

pub fn gundy_verify(f: &Martingale, parts: &GundyParts) -> Result<GundyReport> {
    let lambda = parts.sequence.lambda();
    let sup_l1 = f.sup_l1();
    let ratio = |x: f64| if sup_l1 == 0.0 { 0.0 } else { x / sup_l1 };
    let alpha_sup = parts.alpha.values().iter().map(|v| v.l2_norm_sq()).fold(0.0, f64::max);
    let beta_sum = parts.d_beta.iter().map(|d| schatten_norm(d, 1.0)).sum::<Result<f64>>()?;
    let q = parts.sequence.meet()?;
    let gamma_mass = lambda * q.complement().measure();
    let mut annihilation: f64 = 0.0;
    for d in &parts.d_gamma {
        annihilation = annihilation.max(op_norm(&d.sandwich(&q, &q)));
    }
    let total = &(&parts.alpha.top().clone() + parts.beta.top()) + parts.gamma.top();
    let filt = f.filtration();
    let defect = [&parts.d_alpha, &parts.d_beta, &parts.d_gamma]
        .into_iter()
        .map(|d| difference_defect(filt, d))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(GundyReport {
        alpha_ratio: ratio(alpha_sup / lambda),
        beta_ratio: ratio(beta_sum),
        gamma_ratio: ratio(gamma_mass),
        sup_l1,
        reconstruction: (&total - f.top()).l2_norm(),
        martingale_defect: defect,
        gamma_annihilation: annihilation,
    })
}

/// `q(lambda)` certifies `supp* d gamma_k <= 1 - q(lambda)` when `q d gamma_k q = 0`.
pub fn gamma_support_certified(parts: &GundyParts, tol: f64) -> Result<bool> {
    let q = parts.sequence.meet()?;
    for d in &parts.d_gamma {
        if op_norm(d) > 0.0 && !annihilation_check(&q, d, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `max_k (||E_k d_k - d_k||, ||E_{k-1} d_k||)`, absolute.
fn difference_defect(filt: &Filtration, diffs: &[Operator]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, d) in diffs.iter().enumerate() {
        worst = worst.max((&filt.cond_expect(d, k)? - d).frobenius());
        worst = worst.max(filt.cond_expect_or_zero(d, k as isize - 1)?.frobenius());
    }
    Ok(worst)
}

/// `T_m = A_m + B_m` with `A_m f = sum_k xi_km Delta_r(df_k)`, `B_m f = sum_k xi_km Delta_c(df_k)`.
#[derive(Clone, Debug)]
pub struct ThmA1Parts {
    pub a: OperatorFamily,
    pub b: OperatorFamily,
    pub pi: PiFamily,
    /// `c` with `f + c 1` positive; the pi family is built from the shifted martingale.
    pub shift: f64,
}

/// Builds the pi family from `f + c 1` (`c >= 0` minimal) and splits the transforms of `f`.
pub fn thm_a1_decompose(f: &Martingale, xi: &CoeffMatrix) -> Result<ThmA1Parts> {
    let top = f.top().clone().into_hermitian()?;
    let shift = (-min_eigenvalue(&top)?).max(0.0);
    let positive = if shift > 0.0 { f.shifted(shift) } else { f.clone() };
    let pi = pi_for(&positive)?;
    let (a, b) = split_transforms(f, xi, &pi)?;
    Ok(ThmA1Parts { a, b, pi, shift })
}

/// Dyadic pi family from `l_min = floor(log2 S)` up to the first power of two above `||f||_inf`.
pub fn pi_for(f: &Martingale) -> Result<PiFamily> {
    let sup = f.sup_l1();
    let norm = op_norm(f.top());
    if sup == 0.0 || norm == 0.0 {
        return Ok(PiFamily::trivial(Projection::identity(f.top().trace_functional())));
    }
    let l_max = norm.log2().floor() as i32 + 1;
    let l_min = (sup.log2().floor() as i32).min(l_max);
    pi_family(f, l_min, l_max)
}

pub fn split_transforms(f: &Martingale, xi: &CoeffMatrix, pi: &PiFamily) -> Result<(OperatorFamily, OperatorFamily)> {
    let diffs = f.differences();
    let (rows, cols): (Vec<Operator>, Vec<Operator>) = diffs.iter().map(|d| delta_split(d, pi)).unzip();
    Ok((combine(&rows, xi)?, combine(&cols, xi)?))
}

/// `A_{m l} f = sum_k xi_km Delta_{r l}(d_k)` for an arbitrary difference sequence.
pub fn truncated_family(diffs: &[Operator], xi: &CoeffMatrix, pi: &PiFamily, l: i32) -> Result<OperatorFamily> {
    let trunc: Vec<Operator> = diffs.iter().map(|d| delta_trunc(d, pi, l)).collect();
    combine(&trunc, xi)
}

fn combine(terms: &[Operator], xi: &CoeffMatrix) -> Result<OperatorFamily> {
    if xi.k_max() > terms.len() {
        return Err(Error::contract("more coefficient rows than martingale differences"));
    }
    let ops = (0..xi.m_max())
        .map(|m| {
            terms.iter().take(xi.k_max()).enumerate().fold(terms[0].zero_like(), |acc, (k, t)| {
                let c = xi.entries()[(k, m)];
                if c == C64::new(0.0, 0.0) {
                    acc
                } else {
                    &acc + &t.scale(c)
                }
            })
        })
        .collect();
    OperatorFamily::new(ops)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Weak11Report {
    /// `max_lambda lambda tau{row_square(A) > lambda} / S` over the grid.
    pub row_ratio: f64,
    pub col_ratio: f64,
    /// `||row_square(A)||_{1,inf} / S` computed from the singular values.
    pub row_weak: f64,
    pub col_weak: f64,
    pub sup_l1: f64,
    /// `max_m ||A_m + B_m - T_m||_2`.
    pub reconstruction: f64,
    pub shift: f64,
}

pub fn weak11_experiment(f: &Martingale, xi: &CoeffMatrix, exponents: std::ops::RangeInclusive<i32>) -> Result<Weak11Report> {
    if xi.bound() > 1.0 + 1e-12 {
        return Err(Error::contract(format!("coefficient rows exceed 1 (bound {})", xi.bound())));
    }
    let parts = thm_a1_decompose(f, xi)?;
    let t = transform_family(f, xi)?;
    let reconstruction = t
        .members()
        .iter()
        .zip(parts.a.members().iter().zip(parts.b.members()))
        .map(|(tm, (am, bm))| (&(am + bm) - tm).l2_norm())
        .fold(0.0, f64::max);
    let sup_l1 = f.sup_l1();
    if sup_l1 == 0.0 {
        return Ok(Weak11Report {
            row_ratio: 0.0,
            col_ratio: 0.0,
            row_weak: 0.0,
            col_weak: 0.0,
            sup_l1,
            reconstruction,
            shift: parts.shift,
        });
    }
    let rs = row_square(&parts.a)?;
    let cs = col_square(&parts.b)?;
    let mut row_ratio: f64 = 0.0;
    let mut col_ratio: f64 = 0.0;
    for e in exponents {
        let lambda = 2f64.powi(e);
        row_ratio = row_ratio.max(lambda * tail_trace(&rs, lambda)? / sup_l1);
        col_ratio = col_ratio.max(lambda * tail_trace(&cs, lambda)? / sup_l1);
    }
    Ok(Weak11Report {
        row_ratio,
        col_ratio,
        row_weak: weak_l1(&rs) / sup_l1,
        col_weak: weak_l1(&cs) / sup_l1,
        sup_l1,
        reconstruction,
        shift: parts.shift,
    })
}

/// `xi_km = k / (sqrt(m) (m + 1))` for `k <= m`, zero otherwise.
pub fn ergodic_coeffs(m_max: usize) -> Result<CoeffMatrix> {
    if m_max == 0 {
        return Err(Error::contract("m_max must be at least 1"));
    }
    let e = DMatrix::from_fn(m_max, m_max, |i, j| {
        let (k, m) = ((i + 1) as f64, (j + 1) as f64);
        C64::new(if i <= j { k / (m.sqrt() * (m + 1.0)) } else { 0.0 }, 0.0)
    });
    CoeffMatrix::new(e)
}

/// Reverses a martingale difference sequence so that a decreasing filtration
/// reads as an increasing one: returns `d_{n-k}`.
pub fn reverse_differences(diffs: &[Operator]) -> Vec<Operator> {
    diffs.iter().rev().cloned().collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossReport {
    /// `||sum_{m,n} T_mn f (x) e_{m,n}||_p`.
    pub matrix_norm: f64,
    /// `||sum T_mn f (x) e_{1,mn}||_p`.
    pub row_norm: f64,
    /// `||sum T_mn f (x) e_{mn,1}||_p`.
    pub col_norm: f64,
}

impl CrossReport {
    /// `matrix / (row + col)`, 0 when both sides vanish.
    pub fn ratio(&self) -> f64 {
        let d = self.row_norm + self.col_norm;
        if d == 0.0 {
            0.0
        } else {
            self.matrix_norm / d
        }
    }
}

/// `xi_{k,(m,n)} = rho_km eta_kn`, flattened with `n` fastest.
pub fn product_coeffs(rho: &CoeffMatrix, eta: &CoeffMatrix) -> Result<CoeffMatrix> {
    if rho.k_max() != eta.k_max() {
        return Err(Error::contract("rho and eta need the same number of rows"));
    }
    let (mm, nn) = (rho.m_max(), eta.m_max());
    let e = DMatrix::from_fn(rho.k_max(), mm * nn, |k, j| rho.entries()[(k, j / nn)] * eta.entries()[(k, j % nn)]);
    CoeffMatrix::new(e)
}

pub fn cross_experiment(f: &Martingale, rho: &CoeffMatrix, eta: &CoeffMatrix, p: f64) -> Result<CrossReport> {
    for (name, c) in [("rho", rho), ("eta", eta)] {
        if let Some(s) = c.row_square_sums().into_iter().find(|s| (s - 1.0).abs() > 1e-10) {
            return Err(Error::contract(format!("{name} rows must be unit vectors (found square sum {s})")));
        }
    }
    if !(p >= 1.0) {
        return Err(Error::contract("p must be at least 1"));
    }
    let xi = product_coeffs(rho, eta)?;
    let family = transform_family(f, &xi)?;
    let (mm, nn) = (rho.m_max(), eta.m_max());
    let trace = f.top().trace_functional();
    let b = trace.block_size();
    let mut sum_p = 0.0;
    let mut top: f64 = 0.0;
    let mut all_sv = Vec::new();
    for blk in 0..trace.block_count() {
        let mut big = CMat::zeros(b * mm, b * nn);
        for m in 0..mm {
            for n in 0..nn {
                big.view_mut((m * b, n * b), (b, b)).copy_from(family.members()[m * nn + n].block(blk));
            }
        }
        let sv = big.singular_values();
        top = top.max(sv.max());
        all_sv.extend(sv.iter().copied());
    }
    let matrix_norm = if p.is_infinite() {
        top
    } else if top == 0.0 {
        0.0
    } else {
        for s in all_sv {
            sum_p += (s / top).powf(p);
        }
        top * (sum_p * trace.atom_weight()).powf(1.0 / p)
    };
    Ok(CrossReport {
        matrix_norm,
        row_norm: schatten_norm(&row_square(&family)?, p)?,
        col_norm: schatten_norm(&col_square(&family)?, p)?,
    })
}

#[cfg(test)]
mod tests;
