use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Hermitian certification tolerance, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Normalized trace on the ambient algebra.
///
/// Both kinds give `tau(1) = 1`. The grid kind is block diagonal: one
/// `block x block` matrix per cell, each cell weighted by `1 / cells`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFunctional {
    Normalized { dim: usize },
    Grid { cells: usize, block: usize },
}

impl TraceFunctional {
    pub fn dim(&self) -> usize {
        match *self {
            TraceFunctional::Normalized { dim } => dim,
            TraceFunctional::Grid { cells, block } => cells * block,
        }
    }

    pub fn block_count(&self) -> usize {
        match *self {
            TraceFunctional::Normalized { .. } => 1,
            TraceFunctional::Grid { cells, .. } => cells,
        }
    }

    pub fn block_size(&self) -> usize {
        match *self {
            TraceFunctional::Normalized { dim } => dim,
            TraceFunctional::Grid { block, .. } => block,
        }
    }

    /// Measure of one cell (1 for the plain matrix kind).
    pub fn cell_weight(&self) -> f64 {
        1.0 / self.block_count() as f64
    }

    /// Weight carried by a single eigen/singular value.
    pub fn atom_weight(&self) -> f64 {
        1.0 / self.dim() as f64
    }
}

/// A dense operator, stored as its diagonal blocks.
///
/// Plain matrix algebras use a single block; grid algebras carry one
/// block per cell, which keeps every product exactly block diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    blocks: Vec<CMat>,
    trace: TraceFunctional,
    hermitian: bool,
}

impl Operator {
    pub fn from_matrix(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::contract(format!(
                "operator must be a nonempty square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dim = mat.nrows();
        let op = Operator { blocks: vec![mat], trace: TraceFunctional::Normalized { dim }, hermitian: false };
        op.check_finite()?;
        Ok(op)
    }

    /// Grid-valued operator: one square block per cell.
    pub fn from_blocks(blocks: Vec<CMat>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::contract("at least one block required"));
        };
        let block = first.nrows();
        if block == 0 || blocks.iter().any(|b| b.nrows() != block || b.ncols() != block) {
            return Err(Error::contract("blocks must be square and of equal size"));
        }
        let trace = TraceFunctional::Grid { cells: blocks.len(), block };
        let op = Operator { blocks, trace, hermitian: false };
        op.check_finite()?;
        Ok(op)
    }

    /// Builds from blocks already known to match `trace`. Used internally
    /// where the layout is inherited from an existing operator.
    pub(crate) fn with_layout(blocks: Vec<CMat>, trace: TraceFunctional) -> Self {
        debug_assert_eq!(blocks.len(), trace.block_count());
        Operator { blocks, trace, hermitian: false }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Result<Self> {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        let mat = CMat::from_diagonal(&nalgebra::DVector::from_vec(v));
        Ok(Operator::from_matrix(mat)?.into_hermitian_unchecked())
    }

    pub fn identity(trace: TraceFunctional) -> Self {
        Self::scalar(trace, C64::new(1.0, 0.0))
    }

    pub fn zero(trace: TraceFunctional) -> Self {
        Self::scalar(trace, C64::new(0.0, 0.0))
    }

    pub fn scalar(trace: TraceFunctional, c: C64) -> Self {
        let b = trace.block_size();
        let blocks = (0..trace.block_count()).map(|_| CMat::identity(b, b) * c).collect();
        Operator { blocks, trace, hermitian: c.im == 0.0 }
    }

    pub fn identity_like(&self) -> Self {
        Self::identity(self.trace)
    }

    pub fn zero_like(&self) -> Self {
        Self::zero(self.trace)
    }

    pub fn trace_functional(&self) -> TraceFunctional {
        self.trace
    }

    pub fn dim(&self) -> usize {
        self.trace.dim()
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Full block-diagonal matrix.
    pub fn to_dense(&self) -> CMat {
        let n = self.dim();
        let b = self.trace.block_size();
        let mut out = CMat::zeros(n, n);
        for (i, blk) in self.blocks.iter().enumerate() {
            out.view_mut((i * b, i * b), (b, b)).copy_from(blk);
        }
        out
    }

    pub fn same_layout(&self, other: &Operator) -> bool {
        self.trace == other.trace
    }

    pub fn ensure_same_layout(&self, other: &Operator) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "operator layouts differ: {:?} vs {:?}",
                self.trace, other.trace
            )))
        }
    }

    fn check_finite(&self) -> Result<()> {
        for b in &self.blocks {
            if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("operator entries".into()));
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `a - a*`.
    pub fn hermitian_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b - b.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Checks `max|a - a*| <= 1e-12 max|a|`, then symmetrizes and sets the flag.
    pub fn into_hermitian(self) -> Result<Self> {
        let scale = self.max_abs();
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
            return Err(Error::contract(format!(
                "operator is not Hermitian (defect {defect:e}, scale {scale:e})"
            )));
        }
        Ok(self.into_hermitian_unchecked())
    }

    /// Symmetrizes `(a + a*)/2` and sets the flag without checking.
    pub fn into_hermitian_unchecked(mut self) -> Self {
        for b in &mut self.blocks {
            let s = (&*b + b.adjoint()) * C64::new(0.5, 0.0);
            *b = s;
        }
        self.hermitian = true;
        self
    }

    /// `(a + a*)/2`.
    pub fn real_part(&self) -> Self {
        self.clone().into_hermitian_unchecked()
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
            trace: self.trace,
            hermitian: self.hermitian,
        }
    }

    /// Normalized trace.
    pub fn trace(&self) -> C64 {
        let s: C64 = self.blocks.iter().map(|b| b.trace()).sum();
        s / self.dim() as f64
    }

    /// `tau(a b*)`, the L2 inner product.
    pub fn inner(&self, other: &Operator) -> C64 {
        assert!(self.same_layout(other), "layout mismatch in inner product");
        let mut s = C64::new(0.0, 0.0);
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            s += a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum::<C64>();
        }
        s / self.dim() as f64
    }

    /// `||a||_2^2 = tau(a* a)`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>() / self.dim() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Frobenius norm of the full matrix (unnormalized).
    pub fn frobenius(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        let herm = self.hermitian && c.im == 0.0;
        Operator { blocks: self.blocks.iter().map(|b| b * c).collect(), trace: self.trace, hermitian: herm }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `a x a*`-type compressions and other triple products.
    pub fn sandwich(&self, left: &Operator, right: &Operator) -> Self {
        &(left * self) * right
    }

    pub fn map_blocks(&self, f: impl Fn(usize, &CMat) -> CMat) -> Self {
        let blocks = self.blocks.iter().enumerate().map(|(i, b)| f(i, b)).collect();
        Operator { blocks, trace: self.trace, hermitian: false }
    }

    pub(crate) fn set_hermitian(mut self, flag: bool) -> Self {
        self.hermitian = flag;
        self
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn sum<'a>(ops: impl IntoIterator<Item = &'a Operator>, trace: TraceFunctional) -> Self {
        let mut acc = Operator::zero(trace);
        for op in ops {
            acc = &acc + op;
        }
        acc
    }
}

fn zip_blocks(a: &Operator, b: &Operator, f: impl Fn(&CMat, &CMat) -> CMat) -> Operator {
    assert!(
        a.same_layout(b),
        "operator layout mismatch: {:?} vs {:?}",
        a.trace,
        b.trace
    );
    let blocks = a.blocks.iter().zip(&b.blocks).map(|(x, y)| f(x, y)).collect();
    Operator { blocks, trace: a.trace, hermitian: false }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        let herm = self.hermitian && rhs.hermitian;
        zip_blocks(self, rhs, |x, y| x + y).set_hermitian(herm)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        let herm = self.hermitian && rhs.hermitian;
        zip_blocks(self, rhs, |x, y| x - y).set_hermitian(herm)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        zip_blocks(self, rhs, |x, y| x * y)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Operator {
            type Output = Operator;
            fn $m(self, rhs: Operator) -> Operator {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Operator> for Operator {
            type Output = Operator;
            fn $m(self, rhs: &Operator) -> Operator {
                (&self).$m(rhs)
            }
        }
        impl $tr<Operator> for &Operator {
            type Output = Operator;
            fn $m(self, rhs: Operator) -> Operator {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
