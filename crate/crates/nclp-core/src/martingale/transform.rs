use super::{CoeffMatrix, Martingale, OperatorFamily};
use crate::error::{Error, Result};
use crate::opcore::{schatten_norm, sqrt_positive, Operator, C64};

/// `T_m f = sum_k xi_{km} df_k`.
pub fn transform_family(f: &Martingale, xi: &CoeffMatrix) -> Result<OperatorFamily> {
    let diffs = f.differences();
    transform_differences(&diffs, xi)
}

pub(crate) fn transform_differences(diffs: &[Operator], xi: &CoeffMatrix) -> Result<OperatorFamily> {
    if xi.k_max() > diffs.len() {
        return Err(Error::contract(format!(
            "{} coefficient rows but only {} martingale differences",
            xi.k_max(),
            diffs.len()
        )));
    }
    let zero = diffs[0].zero_like();
    let ops = (0..xi.m_max())
        .map(|m| {
            let mut acc = zero.clone();
            for (k, d) in diffs.iter().enumerate().take(xi.k_max()) {
                let c = xi.entries()[(k, m)];
                if c != C64::new(0.0, 0.0) {
                    acc = &acc + &d.scale(c);
                }
            }
            acc
        })
        .collect();
    OperatorFamily::new(ops)
}

/// `(sum_m g_m g_m*)^{1/2}`.
pub fn row_square(g: &OperatorFamily) -> Result<Operator> {
    let ops = g.members();
    let mut acc = ops[0].zero_like();
    for x in ops {
        acc = &acc + &(x * &x.adjoint());
    }
    sqrt_positive(&acc.into_hermitian_unchecked())
}

/// `(sum_m g_m* g_m)^{1/2}`.
pub fn col_square(g: &OperatorFamily) -> Result<Operator> {
    let ops = g.members();
    let mut acc = ops[0].zero_like();
    for x in ops {
        acc = &acc + &(&x.adjoint() * x);
    }
    sqrt_positive(&acc.into_hermitian_unchecked())
}

/// `max(||row||_p, ||col||_p)` for `p >= 2`.
pub fn lp_rc_norm(g: &OperatorFamily, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::contract(format!(
            "row/column norm for p = {p} < 2 is an infimum; use split_upper_bound"
        )));
    }
    let r = schatten_norm(&row_square(g)?, p)?;
    let c = schatten_norm(&col_square(g)?, p)?;
    Ok(r.max(c))
}

/// `||row(a)||_p + ||col(b)||_p`, the upper bound given by the split `g = a + b`.
pub fn split_upper_bound(a: &OperatorFamily, b: &OperatorFamily, p: f64) -> Result<f64> {
    Ok(schatten_norm(&row_square(a)?, p)? + schatten_norm(&col_square(b)?, p)?)
}

/// `| ||(T_m f)||^2 - sum_k ||df_k||^2 |` for unit-row coefficients.
pub fn l2_identity_check(f: &Martingale, xi: &CoeffMatrix) -> Result<f64> {
    if let Some((k, s)) = xi.row_square_sums().into_iter().enumerate().find(|(_, s)| (s - 1.0).abs() > 1e-12) {
        return Err(Error::contract(format!("row {} has square sum {s}, expected 1", k + 1)));
    }
    l2_weighted_residual(f, xi)
}

/// `| ||(T_m f)||^2 - sum_k gamma_k ||df_k||^2 |` with `gamma_k` the row square sums.
pub fn l2_weighted_residual(f: &Martingale, xi: &CoeffMatrix) -> Result<f64> {
    let diffs = f.differences();
    let family = transform_differences(&diffs, xi)?;
    let expected: f64 =
        xi.row_square_sums().iter().zip(&diffs).map(|(g, d)| g * d.l2_norm_sq()).sum();
    Ok((family.l2_norm_sq() - expected).abs())
}

/// `sum_m T_m^* g^m = sum_k sum_m conj(xi_{km}) dg^m_k`, the adjoint of
/// `f -> sum_m T_m f (x) delta_m` for the pairing `tau(a b*)`.
pub fn transform_adjoint(g: &[Martingale], xi: &CoeffMatrix) -> Result<Operator> {
    if g.len() != xi.m_max() {
        return Err(Error::contract("one martingale per coefficient column required"));
    }
    let mut acc = g[0].top().zero_like();
    for (m, gm) in g.iter().enumerate() {
        let diffs = gm.differences();
        if xi.k_max() > diffs.len() {
            return Err(Error::contract("coefficient rows exceed martingale length"));
        }
        for (k, d) in diffs.iter().enumerate().take(xi.k_max()) {
            acc = &acc + &d.scale(xi.entries()[(k, m)].conj());
        }
    }
    Ok(acc)
}

/// The `p = 4` chain: brute-force Rademacher average against its termwise
/// expansion and the Holder bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P4Expansion {
    /// `int tau (sum_k |xi_k(w)|^2 |df_k|^2)^2 dmu(w)`.
    pub brute_force: f64,
    /// `sum_{k1,k2} (int |xi_k1|^2 |xi_k2|^2) tau(|df_k1|^2 |df_k2|^2)`.
    pub expanded: f64,
    /// Same sum with the integral replaced by `prod (int |xi_k|^4)^{1/2}`.
    pub holder_bound: f64,
}

/// Rademacher averages are taken exactly over `{+-1}^M` (`M <= 16`).
pub fn remark_p4_expansion(f: &Martingale, xi: &CoeffMatrix) -> Result<P4Expansion> {
    let m_max = xi.m_max();
    if m_max > 16 {
        return Err(Error::contract("exact Rademacher enumeration limited to 16 columns"));
    }
    let diffs = f.differences();
    let k_max = xi.k_max().min(diffs.len());
    let abs_sq: Vec<Operator> = diffs[..k_max].iter().map(|d| &d.adjoint() * d).collect();
    let points = 1usize << m_max;
    let xi_at = |w: usize, k: usize| -> C64 {
        (0..m_max).map(|m| xi.entries()[(k, m)] * if (w >> m) & 1 == 1 { -1.0 } else { 1.0 }).sum()
    };
    let mut brute = 0.0;
    let mut moments2 = vec![vec![0.0; k_max]; k_max];
    let mut moment4 = vec![0.0; k_max];
    for w in 0..points {
        let weights: Vec<f64> = (0..k_max).map(|k| xi_at(w, k).norm_sqr()).collect();
        let mut s = abs_sq[0].zero_like();
        for (k, a) in abs_sq.iter().enumerate() {
            s = &s + &a.scale_real(weights[k]);
        }
        brute += (&s * &s).trace().re;
        for i in 0..k_max {
            moment4[i] += weights[i] * weights[i];
            for j in 0..k_max {
                moments2[i][j] += weights[i] * weights[j];
            }
        }
    }
    let norm = 1.0 / points as f64;
    let mut expanded = 0.0;
    let mut holder = 0.0;
    for i in 0..k_max {
        for j in 0..k_max {
            let t = (&abs_sq[i] * &abs_sq[j]).trace().re;
            expanded += moments2[i][j] * norm * t;
            holder += (moment4[i] * norm).sqrt() * (moment4[j] * norm).sqrt() * t;
        }
    }
    Ok(P4Expansion { brute_force: brute * norm, expanded, holder_bound: holder })
}
