use std::ops::Deref;

use nalgebra::{DVector, SymmetricEigen};

use super::operator::{CMat, Operator, TraceFunctional, C64};
use crate::error::{Error, Result};

/// Eigenvalues closer than this are merged into one spectral projection.
pub const MERGE_TOL: f64 = 1e-9;
/// Eigenvalues within this distance of an interval endpoint follow the
/// endpoint's open/closed convention.
pub const ENDPOINT_TOL: f64 = 1e-9;

const EIGEN_MAX_ITER: usize = 10_000;

/// Eigen-data of one diagonal block.
#[derive(Clone, Debug)]
pub struct BlockEigen {
    pub values: DVector<f64>,
    pub vectors: CMat,
}

/// Hermitian eigendecomposition, block by block.
pub fn eigh(h: &Operator) -> Result<Vec<BlockEigen>> {
    if !h.is_hermitian() {
        return Err(Error::contract("spectral calculus needs a Hermitian operator"));
    }
    h.blocks().iter().map(eigh_block).collect()
}

pub(crate) fn eigh_block(b: &CMat) -> Result<BlockEigen> {
    let eig = SymmetricEigen::try_new(b.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::Convergence { routine: "hermitian eigensolver", iterations: EIGEN_MAX_ITER })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigenvalues".into()));
    }
    Ok(BlockEigen { values: eig.eigenvalues, vectors: eig.eigenvectors })
}

/// An orthogonal projection in the ambient algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection(Operator);

impl Projection {
    /// Checks `p = p*`, `p^2 = p` (1e-10 Frobenius-relative) and
    /// eigenvalues in {0,1} within 1e-8.
    pub fn new(op: Operator) -> Result<Self> {
        let op = op.into_hermitian()?;
        let scale = op.frobenius().max(1.0);
        let sq = &op * &op;
        if (&sq - &op).frobenius() > 1e-10 * scale {
            return Err(Error::contract("operator is not idempotent"));
        }
        for be in eigh(&op)? {
            if be.values.iter().any(|&v| v.abs() > 1e-8 && (v - 1.0).abs() > 1e-8) {
                return Err(Error::contract("projection eigenvalues must lie in {0,1}"));
            }
        }
        Ok(Projection(op))
    }

    /// Trusted constructor for operators built as `V V*` from orthonormal columns.
    pub(crate) fn trusted(op: Operator) -> Self {
        Projection(op.into_hermitian_unchecked())
    }

    pub fn identity(trace: TraceFunctional) -> Self {
        Projection(Operator::identity(trace))
    }

    pub fn zero(trace: TraceFunctional) -> Self {
        Projection(Operator::zero(trace))
    }

    /// `1 - p`.
    pub fn complement(&self) -> Self {
        Projection::trusted(&self.0.identity_like() - &self.0)
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    /// Normalized trace `tau(p)`.
    pub fn measure(&self) -> f64 {
        self.0.trace().re
    }

    /// Projection onto the span of the given block-local orthonormal vectors.
    pub(crate) fn from_block_vectors(trace: TraceFunctional, per_block: Vec<Vec<DVector<C64>>>) -> Self {
        let b = trace.block_size();
        let blocks = per_block
            .into_iter()
            .map(|vs| {
                let mut m = CMat::zeros(b, b);
                for v in vs {
                    m += &v * v.adjoint();
                }
                m
            })
            .collect();
        Projection::trusted(Operator::with_layout(blocks, trace))
    }
}

impl Deref for Projection {
    type Target = Operator;
    fn deref(&self) -> &Operator {
        &self.0
    }
}

/// Real interval with explicit endpoint conventions. Infinite ends are
/// expressed with `f64::INFINITY`/`f64::NEG_INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    /// `(lo, hi]`
    pub fn open_closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: true }
    }

    /// `[lo, hi)`
    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    /// `(lo, inf)`
    pub fn above(lo: f64) -> Self {
        Interval::open(lo, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = if (x - self.lo).abs() <= ENDPOINT_TOL { self.lo_closed } else { x > self.lo };
        let hi_ok = if (x - self.hi).abs() <= ENDPOINT_TOL { self.hi_closed } else { x < self.hi };
        lo_ok && hi_ok
    }
}

/// Eigenvalues sorted ascending with their (merged) eigenprojections.
pub fn spectral_decompose(h: &Operator) -> Result<Vec<(f64, Projection)>> {
    let eig = eigh(h)?;
    let trace = h.trace_functional();
    // (value, block, column)
    let mut atoms: Vec<(f64, usize, usize)> = Vec::with_capacity(h.dim());
    for (bi, be) in eig.iter().enumerate() {
        for (ci, &v) in be.values.iter().enumerate() {
            atoms.push((v, bi, ci));
        }
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for atom in atoms {
        match clusters.last_mut() {
            Some(c) if atom.0 - c.last().unwrap().0 <= MERGE_TOL => c.push(atom),
            _ => clusters.push(vec![atom]),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|c| {
            let value = c.iter().map(|a| a.0).sum::<f64>() / c.len() as f64;
            let mut per_block = vec![Vec::new(); trace.block_count()];
            for (_, bi, ci) in c {
                per_block[bi].push(eig[bi].vectors.column(ci).into_owned());
            }
            (value, Projection::from_block_vectors(trace, per_block))
        })
        .collect())
}

/// `chi_I(h)`.
pub fn spectral_projection(h: &Operator, interval: Interval) -> Result<Projection> {
    let eig = eigh(h)?;
    Ok(select_eigenvectors(h.trace_functional(), &eig, |v| interval.contains(v)))
}

pub(crate) fn select_eigenvectors(
    trace: TraceFunctional,
    eig: &[BlockEigen],
    keep: impl Fn(f64) -> bool,
) -> Projection {
    let per_block = eig
        .iter()
        .map(|be| {
            be.values
                .iter()
                .enumerate()
                .filter(|(_, &v)| keep(v))
                .map(|(i, _)| be.vectors.column(i).into_owned())
                .collect()
        })
        .collect();
    Projection::from_block_vectors(trace, per_block)
}

/// Orthonormal basis of the range of `p`, one matrix of columns per block.
pub(crate) fn range_basis(p: &Projection) -> Result<Vec<CMat>> {
    let eig = eigh(p)?;
    Ok(eig
        .iter()
        .map(|be| {
            let cols: Vec<_> =
                (0..be.values.len()).filter(|&i| be.values[i] > 0.5).map(|i| be.vectors.column(i).into_owned()).collect();
            if cols.is_empty() {
                CMat::zeros(be.vectors.nrows(), 0)
            } else {
                CMat::from_columns(&cols)
            }
        })
        .collect())
}

/// Applies a real function through the spectral theorem.
pub fn functional_calculus(h: &Operator, f: impl Fn(f64) -> f64) -> Result<Operator> {
    let eig = eigh(h)?;
    let blocks = eig
        .iter()
        .map(|be| {
            let d = be.values.map(|v| C64::new(f(v), 0.0));
            &be.vectors * CMat::from_diagonal(&d) * be.vectors.adjoint()
        })
        .collect();
    Ok(Operator::with_layout(blocks, h.trace_functional()).into_hermitian_unchecked())
}

/// Square root of a positive operator (negative round-off is clipped).
pub fn sqrt_positive(h: &Operator) -> Result<Operator> {
    functional_calculus(h, |v| v.max(0.0).sqrt())
}

/// `|f| = (f* f)^{1/2}`.
pub fn abs(f: &Operator) -> Result<Operator> {
    sqrt_positive(&(&f.adjoint() * f).into_hermitian_unchecked())
}

/// Smallest and largest eigenvalue of a Hermitian operator.
pub fn eigen_range(h: &Operator) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for be in eigh(h)? {
        for &v in be.values.iter() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok((lo, hi))
}

pub fn min_eigenvalue(h: &Operator) -> Result<f64> {
    Ok(eigen_range(h)?.0)
}

pub fn max_eigenvalue(h: &Operator) -> Result<f64> {
    Ok(eigen_range(h)?.1)
}

/// Singular values, sorted descending; each carries trace weight `1/dim`.
pub fn singular_values(f: &Operator) -> Vec<f64> {
    let mut out: Vec<f64> = f
        .blocks()
        .iter()
        .flat_map(|b| b.clone().svd(false, false).singular_values.iter().copied().collect::<Vec<_>>())
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}
