//! Martingales, transform families, square functions and BMO norms.

mod bmo;
mod transform;

pub use bmo::{bmo_norms, function_bmo, function_bmo_cells, BmoNorms};
pub use transform::{
    col_square, l2_identity_check, l2_weighted_residual, lp_rc_norm, remark_p4_expansion, row_square,
    split_upper_bound, transform_adjoint, transform_family, P4Expansion,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::opcore::{min_eigenvalue, schatten_norm, Operator, C64};

/// Adapted sequence `f_k = E_k(f)` over levels `0..=top`.
///
/// Differences follow `f_{-1} = 0`, so `df_0 = f_0`.
#[derive(Clone, Debug)]
pub struct Martingale {
    filtration: Filtration,
    values: Vec<Operator>,
}

impl Martingale {
    /// The closed martingale of `top`.
    pub fn from_top(filtration: &Filtration, top: &Operator) -> Result<Self> {
        let values = filtration.levels().map(|k| filtration.cond_expect(top, k)).collect::<Result<_>>()?;
        Ok(Martingale { filtration: filtration.clone(), values })
    }

    /// Rebuilds from differences `df_0..df_top`, checking the martingale property.
    pub fn from_differences(filtration: &Filtration, diffs: &[Operator], tol: f64) -> Result<Self> {
        if diffs.len() != filtration.top() + 1 {
            return Err(Error::contract("one difference per level required"));
        }
        let m = Self::from_differences_unchecked(filtration, diffs);
        let defect = m.martingale_defect()?;
        if defect > tol {
            return Err(Error::contract(format!("sequence is not a martingale (defect {defect:e})")));
        }
        Ok(m)
    }

    /// Partial sums of `diffs` without the martingale check.
    pub(crate) fn from_differences_unchecked(filtration: &Filtration, diffs: &[Operator]) -> Self {
        let mut values = Vec::with_capacity(diffs.len());
        let mut acc = filtration.zero();
        for d in diffs {
            acc = &acc + d;
            values.push(acc.clone());
        }
        Martingale { filtration: filtration.clone(), values }
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn top_level(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Operator] {
        &self.values
    }

    pub fn value(&self, k: usize) -> &Operator {
        &self.values[k]
    }

    pub fn top(&self) -> &Operator {
        self.values.last().expect("nonempty")
    }

    pub fn differences(&self) -> Vec<Operator> {
        let mut out = Vec::with_capacity(self.values.len());
        for (k, v) in self.values.iter().enumerate() {
            out.push(if k == 0 { v.clone() } else { v - &self.values[k - 1] });
        }
        out
    }

    /// `sup_k ||f_k||_1`.
    pub fn sup_l1(&self) -> f64 {
        self.values.iter().map(|v| schatten_norm(v, 1.0).expect("p=1")).fold(0.0, f64::max)
    }

    /// `max_{j<=k} ||E_j f_k - f_j||_F`, relative to `||f_top||_F`.
    pub fn martingale_defect(&self) -> Result<f64> {
        let scale = self.top().frobenius().max(1e-300);
        let mut worst: f64 = 0.0;
        for (k, fk) in self.values.iter().enumerate() {
            for j in 0..=k {
                let e = self.filtration.cond_expect(fk, j)?;
                worst = worst.max((&e - &self.values[j]).frobenius() / scale);
            }
        }
        Ok(worst)
    }

    /// Checks that every `f_k` is positive within `tol`.
    pub fn is_positive(&self, tol: f64) -> Result<bool> {
        for v in &self.values {
            let h = v.clone().into_hermitian()?;
            if min_eigenvalue(&h)? < -tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Adds `c 1` to every `f_k` (only `df_0` changes).
    pub fn shifted(&self, c: f64) -> Self {
        let one = self.filtration.identity().scale_real(c);
        Martingale { filtration: self.filtration.clone(), values: self.values.iter().map(|v| v + &one).collect() }
    }
}

/// Transform coefficients `xi_{km}`. Row `k` (counted from 1) multiplies the
/// k-th martingale difference, i.e. `df_{k-1}` in the 0-based level labels.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMatrix {
    entries: DMatrix<C64>,
    bound: f64,
}

impl CoeffMatrix {
    /// Caches `B = sup_k sum_m |xi_{km}|^2`.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let bound = row_sums(&entries).into_iter().fold(0.0, f64::max);
        Self::with_bound(entries, bound)
    }

    /// Rejects rows whose square sum exceeds `bound + 1e-12`.
    pub fn with_bound(entries: DMatrix<C64>, bound: f64) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::contract("coefficient matrix must be nonempty"));
        }
        if !bound.is_finite() || entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("coefficients".into()));
        }
        if let Some((k, s)) = row_sums(&entries).into_iter().enumerate().find(|(_, s)| *s > bound + 1e-12) {
            return Err(Error::contract(format!("row {} has square sum {s} above bound {bound}", k + 1)));
        }
        Ok(CoeffMatrix { entries, bound })
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::contract("ragged coefficient rows"));
        }
        Self::new(DMatrix::from_fn(k, m, |i, j| C64::new(rows[i][j], 0.0)))
    }

    /// `xi_{km} = delta_{km}`.
    pub fn dirac(k_max: usize, m_max: usize) -> Self {
        Self::new(DMatrix::from_fn(k_max, m_max, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)))
            .expect("valid")
    }

    /// Single transform with signs `eps_k`.
    pub fn signs(eps: &[f64]) -> Result<Self> {
        Self::from_real(&eps.iter().map(|&e| vec![e]).collect::<Vec<_>>())
    }

    /// `xi_{km} = 1` iff `k` lies in block `m`; `labels[k]` is the block of row k.
    pub fn partition(labels: &[usize], blocks: usize) -> Result<Self> {
        if labels.iter().any(|&l| l >= blocks) {
            return Err(Error::contract("partition label out of range"));
        }
        let rows: Vec<Vec<f64>> =
            labels.iter().map(|&l| (0..blocks).map(|m| if m == l { 1.0 } else { 0.0 }).collect()).collect();
        Self::from_real(&rows)
    }

    pub fn k_max(&self) -> usize {
        self.entries.nrows()
    }

    pub fn m_max(&self) -> usize {
        self.entries.ncols()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Entry with 1-based indices.
    pub fn xi(&self, k: usize, m: usize) -> C64 {
        self.entries[(k - 1, m - 1)]
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn row_square_sums(&self) -> Vec<f64> {
        row_sums(&self.entries)
    }

    /// Multiplies row k by `factors[k]`.
    pub fn scale_rows(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.k_max() {
            return Err(Error::contract("one factor per row"));
        }
        let mut e = self.entries.clone();
        for (k, f) in factors.iter().enumerate() {
            e.row_mut(k).scale_mut(*f);
        }
        Self::new(e)
    }
}

fn row_sums(e: &DMatrix<C64>) -> Vec<f64> {
    e.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect()
}

/// Indexed operators in one algebra.
#[derive(Clone, Debug)]
pub struct OperatorFamily(Vec<Operator>);

impl OperatorFamily {
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::contract("operator family must be nonempty"));
        };
        for op in &ops {
            first.ensure_same_layout(op)?;
        }
        Ok(OperatorFamily(ops))
    }

    pub fn members(&self) -> &[Operator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum_m ||g_m||_2^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.0.iter().map(|g| g.l2_norm_sq()).sum()
    }

    pub fn add(&self, other: &OperatorFamily) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::contract("families differ in length"));
        }
        OperatorFamily::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn map(&self, f: impl Fn(&Operator) -> Operator) -> Self {
        OperatorFamily(self.0.iter().map(f).collect())
    }
}
