//! Discretized operators `L_2(grid) -> L_2(grid) (x) C^M` and the dyadic
//! pieces `Phi_s`, `Psi_s` built from them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::kernel::HilbertKernel;
use crate::error::{Error, Result};
use crate::filtration::Grid;

pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Above this size the top eigenvalue comes from power iteration.
const DENSE_EIGEN_LIMIT: usize = 256;
const POWER_START_SEED: u64 = 0x5eed;

/// One real `N x N` matrix per component. Entries already carry the cell
/// measure, so `(Tf)_m(x) = sum_y A_m[x,y] f(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscOp {
    grid: Grid,
    components: Vec<RMat>,
    normalization: f64,
}

impl DiscOp {
    pub fn from_components(grid: Grid, components: Vec<RMat>) -> Result<Self> {
        let n = grid.cells();
        if components.is_empty() {
            return Err(Error::contract("at least one component required"));
        }
        if components.iter().any(|c| c.shape() != (n, n)) {
            return Err(Error::contract(format!("components must be {n} x {n}")));
        }
        if components.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("non-finite operator entry".into()));
        }
        Ok(DiscOp { grid, components, normalization: 1.0 })
    }

    pub fn zero(grid: Grid, components: usize) -> Self {
        let n = grid.cells();
        DiscOp { grid, components: vec![RMat::zeros(n, n); components.max(1)], normalization: 1.0 }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn components(&self) -> &[RMat] {
        &self.components
    }

    /// Factor the assembled matrix was divided by.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    fn with_components(&self, components: Vec<RMat>) -> Self {
        DiscOp { grid: self.grid, components, normalization: self.normalization }
    }

    pub fn map(&self, f: impl Fn(&RMat) -> RMat) -> Self {
        self.with_components(self.components.iter().map(f).collect())
    }

    pub fn sub(&self, other: &DiscOp) -> Result<Self> {
        if self.grid != other.grid || self.components.len() != other.components.len() {
            return Err(Error::contract("operators differ in grid or component count"));
        }
        Ok(self.with_components(self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &DiscOp) -> Result<Self> {
        if self.grid != other.grid || self.components.len() != other.components.len() {
            return Err(Error::contract("operators differ in grid or component count"));
        }
        Ok(self.with_components(self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect()))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|a| a * c)
    }

    pub fn apply(&self, f: &RVec) -> Vec<RVec> {
        self.components.iter().map(|a| a * f).collect()
    }

    /// `T* g = sum_m A_m^T g_m`.
    pub fn apply_adjoint(&self, g: &[RVec]) -> RVec {
        self.components.iter().zip(g).fold(RVec::zeros(self.grid.cells()), |acc, (a, v)| acc + a.transpose() * v)
    }

    /// `T* T`.
    pub fn gram(&self) -> RMat {
        let n = self.grid.cells();
        let mut g = RMat::zeros(n, n);
        for a in &self.components {
            g.gemm_tr(1.0, a, a, 1.0);
        }
        g
    }

    /// `||T||_{L_2 -> L_2(H)}`.
    pub fn norm(&self) -> f64 {
        top_eigenvalue(&self.gram()).max(0.0).sqrt()
    }

    /// Power iteration on `T* T` from a fixed pseudo-random start: at least
    /// `min_iter` steps, then until the relative change drops below `1e-10`.
    pub fn power_norm(&self, min_iter: usize, max_iter: usize) -> f64 {
        let n = self.grid.cells();
        let mut v = start_vector(n);
        let mut last = 0.0;
        for it in 0..max_iter {
            let w = self.apply_adjoint(&self.apply(&v));
            let est = v.dot(&w);
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            v = w / norm;
            if it >= min_iter && (est - last).abs() <= 1e-10 * est.abs() {
                return est.max(0.0).sqrt();
            }
            last = est;
        }
        last.max(0.0).sqrt()
    }

    /// Divides by the measured norm so that `||T|| = 1`.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::NonFinite("cannot normalize the zero operator".into()));
        }
        let mut out = self.scale(1.0 / norm);
        out.normalization = self.normalization * norm;
        Ok(out)
    }

    /// `T_eps`: entries with torus distance `<= eps` set to zero.
    pub fn truncated(&self, eps: f64) -> Self {
        let dist = distances(&self.grid);
        self.map(|a| a.zip_map(&dist, |v, d| if d <= eps { 0.0 } else { v }))
    }

    /// `(T f)` for a function with `d x d` matrix values, entrywise.
    pub fn apply_blocks(&self, blocks: &[crate::opcore::CMat]) -> Result<Vec<Vec<crate::opcore::CMat>>> {
        let n = self.grid.cells();
        if blocks.len() != n {
            return Err(Error::contract("one block per cell required"));
        }
        let (r, c) = blocks[0].shape();
        let re = RMat::from_fn(n, r * c, |x, e| blocks[x][(e % r, e / r)].re);
        let im = RMat::from_fn(n, r * c, |x, e| blocks[x][(e % r, e / r)].im);
        Ok(self
            .components
            .iter()
            .map(|a| {
                let (pr, pi) = (a * &re, a * &im);
                (0..n)
                    .map(|x| {
                        crate::opcore::CMat::from_fn(r, c, |i, j| {
                            crate::opcore::C64::new(pr[(x, i + j * r)], pi[(x, i + j * r)])
                        })
                    })
                    .collect()
            })
            .collect())
    }
}

fn start_vector(n: usize) -> RVec {
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_START_SEED);
    let v = RVec::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
    let norm = v.norm();
    v / norm
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
pub fn top_eigenvalue(g: &RMat) -> f64 {
    let n = g.nrows();
    if n == 0 {
        return 0.0;
    }
    if n <= DENSE_EIGEN_LIMIT {
        return SymmetricEigen::new(g.clone()).eigenvalues.max();
    }
    let mut v = start_vector(n);
    let mut last: f64 = 0.0;
    for _ in 0..6000 {
        let w = g * &v;
        let est = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (est - last).abs() <= 1e-13 * est.abs() {
            return est;
        }
        last = est;
    }
    last
}

/// Spectral norm of a real rectangular matrix.
pub fn matrix_norm(a: &RMat) -> f64 {
    let g = if a.nrows() < a.ncols() { a * a.transpose() } else { a.transpose() * a };
    top_eigenvalue(&g).max(0.0).sqrt()
}

/// Torus l-infinity distances between cell midpoints.
pub fn distances(grid: &Grid) -> RMat {
    let n = grid.cells();
    RMat::from_fn(n, n, |x, y| grid.distance(x, y))
}

/// Midpoint quadrature of a kernel, with entries at distance `<= eps` set to
/// zero; `eps = 0` zeroes only the diagonal.
pub fn assemble(kernel: &HilbertKernel, grid: Grid, eps: f64) -> Result<DiscOp> {
    if grid.dim != kernel.dim() {
        return Err(Error::contract("kernel and grid dimensions differ"));
    }
    if grid.depth < 2 {
        return Err(Error::contract("assembly needs grid depth at least 2"));
    }
    let n = grid.cells();
    let h = grid.cell_size();
    let w = grid.cell_measure();
    let m = kernel.components();
    // translation invariance: evaluate once per offset
    let side = grid.side() as i64;
    let offsets = if grid.dim == 2 { n } else { grid.side() };
    let mut table = vec![vec![0.0; m]; offsets];
    for (idx, slot) in table.iter_mut().enumerate() {
        let (a, b) = ((idx as i64) % side, (idx as i64) / side);
        let t = [a as f64 * h, b as f64 * h];
        let vals = kernel.eval(t);
        if let Some(bad) = vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("kernel component {bad} not finite at offset {t:?}").into()));
        }
        *slot = vals;
    }
    let mut comps = vec![RMat::zeros(n, n); m];
    for x in 0..n {
        for y in 0..n {
            if x == y || grid.distance(x, y) <= eps {
                continue;
            }
            let o = grid.offset(y, x);
            let idx = (o[0].rem_euclid(side) + o[1].rem_euclid(side) * side) as usize;
            for (c, v) in comps.iter_mut().zip(&table[idx]) {
                c[(x, y)] = v * w;
            }
        }
    }
    DiscOp::from_components(grid, comps)
}

/// Dyadic frequency bands on the one-dimensional torus: component `j` keeps
/// `2^j <= |xi| < 2^{j+1}` (the last band also takes `xi = -N/2`).
pub fn annuli(grid: Grid) -> Result<DiscOp> {
    if grid.dim != 1 {
        return Err(Error::contract("the annuli family lives on the one-dimensional torus"));
    }
    let n = grid.cells();
    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(n);
    let mut comps = Vec::with_capacity(grid.depth);
    for j in 0..grid.depth {
        let mut spec: Vec<Complex<f64>> = (0..n)
            .map(|i| {
                let xi = if i >= n / 2 { i as i64 - n as i64 } else { i as i64 };
                let a = xi.unsigned_abs() as usize;
                let inside = (a >= 1 << j && a < 2 << j) || (j + 1 == grid.depth && a == n / 2);
                Complex::new(if inside { 1.0 } else { 0.0 }, 0.0)
            })
            .collect();
        ifft.process(&mut spec);
        // column y is the band kernel centred at y
        let kernel: Vec<f64> = spec.iter().map(|c| c.re / n as f64).collect();
        comps.push(RMat::from_fn(n, n, |x, y| kernel[(x + n - y) % n]));
    }
    DiscOp::from_components(grid, comps)
}

/// Label of the level-`k` cube of every cell.
fn labels(grid: &Grid, level: usize) -> Vec<usize> {
    (0..grid.cells()).map(|c| grid.cube_index(c, level)).collect()
}

/// `E_k` applied to a column vector.
pub fn expect_vec(grid: &Grid, f: &RVec, level: usize) -> RVec {
    let lab = labels(grid, level);
    let count = lab.iter().max().map_or(0, |m| m + 1);
    let per = grid.cells() / count;
    let mut sums = vec![0.0; count];
    for (x, &l) in lab.iter().enumerate() {
        sums[l] += f[x];
    }
    RVec::from_fn(grid.cells(), |x, _| sums[lab[x]] / per as f64)
}

/// `Delta_j = E_j - E_{j-1}` with `E_{-1} = 0`.
pub fn diff_vec(grid: &Grid, f: &RVec, level: usize) -> RVec {
    if level == 0 {
        expect_vec(grid, f, 0)
    } else {
        expect_vec(grid, f, level) - expect_vec(grid, f, level - 1)
    }
}

/// `E_k A` (averages rows over level-`k` cubes).
pub fn expect_rows(grid: &Grid, a: &RMat, level: usize) -> RMat {
    let lab = labels(grid, level);
    let count = lab.iter().max().map_or(0, |m| m + 1);
    let per = (grid.cells() / count) as f64;
    let mut sums = RMat::zeros(count, a.ncols());
    for (x, &l) in lab.iter().enumerate() {
        let mut row = sums.row_mut(l);
        row += a.row(x);
    }
    sums /= per;
    RMat::from_fn(a.nrows(), a.ncols(), |x, y| sums[(lab[x], y)])
}

/// `A E_k` (averages columns over level-`k` cubes).
pub fn expect_cols(grid: &Grid, a: &RMat, level: usize) -> RMat {
    expect_rows(grid, &a.transpose(), level).transpose()
}

/// `A Delta_j`.
pub fn diff_cols(grid: &Grid, a: &RMat, level: usize) -> RMat {
    if level == 0 {
        expect_cols(grid, a, 0)
    } else {
        expect_cols(grid, a, level) - expect_cols(grid, a, level - 1)
    }
}

fn check_shift(op: &DiscOp, s: usize) -> Result<()> {
    if s == 0 || s >= op.grid.depth {
        return Err(Error::contract(format!("shift s = {s} must satisfy 1 <= s < K = {}", op.grid.depth)));
    }
    Ok(())
}

/// `Lambda_{s,k} = E_k T Delta_{k+s}`.
pub fn lambda_sk(op: &DiscOp, s: usize, k: usize) -> Result<DiscOp> {
    check_shift(op, s)?;
    if k + s > op.grid.depth {
        return Err(Error::contract("level k + s beyond the grid depth"));
    }
    let g = op.grid;
    Ok(op.map(|a| expect_rows(&g, &diff_cols(&g, a, k + s), k)))
}

/// `Phi_s = sum_{k=0}^{K-s} E_k T Delta_{k+s}`.
pub fn phi_s(op: &DiscOp, s: usize) -> Result<DiscOp> {
    check_shift(op, s)?;
    let g = op.grid;
    Ok(op.map(|a| {
        (0..=g.depth - s).fold(RMat::zeros(a.nrows(), a.ncols()), |acc, k| {
            acc + expect_rows(&g, &diff_cols(&g, a, k + s), k)
        })
    }))
}

/// `Psi_s = sum_{k=0}^{K-s} (id - E_k) T_{4 2^{-k}} Delta_{k+s}`.
pub fn psi_s(op: &DiscOp, s: usize) -> Result<DiscOp> {
    check_shift(op, s)?;
    let g = op.grid;
    let dist = distances(&g);
    Ok(op.map(|a| {
        (0..=g.depth - s).fold(RMat::zeros(a.nrows(), a.ncols()), |acc, k| {
            let eps = 4.0 * 2f64.powi(-(k as i32));
            let cut = a.zip_map(&dist, |v, d| if d <= eps { 0.0 } else { v });
            let b = diff_cols(&g, &cut, k + s);
            acc + &b - expect_rows(&g, &b, k)
        })
    }))
}

/// Schur test: `sqrt(||S_1||_inf ||S_2||_inf)` with `S_1` the row sums and
/// `S_2` the column sums of the componentwise `l_2` norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurBound {
    pub s1: f64,
    pub s2: f64,
    pub bound: f64,
}

pub fn entry_norms(op: &DiscOp) -> RMat {
    let n = op.grid.cells();
    let mut acc = RMat::zeros(n, n);
    for a in &op.components {
        acc += a.component_mul(a);
    }
    acc.map(f64::sqrt)
}

pub fn schur_bound(op: &DiscOp) -> SchurBound {
    let e = entry_norms(op);
    let s1 = e.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
    let s2 = e.column_iter().map(|c| c.sum()).fold(0.0, f64::max);
    SchurBound { s1, s2, bound: (s1 * s2).sqrt() }
}

/// Cotlar's lemma on a finite family: `alpha_d = max_{|i-j|=d}
/// max(||T_i* T_j||, ||T_i T_j*||)^{1/2}` and the bound `alpha_0 + 2 sum_{d>=1} alpha_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CotlarBound {
    pub alphas: Vec<f64>,
    pub bound: f64,
}

fn sqrt_psd(g: &RMat) -> RMat {
    let eig = SymmetricEigen::new(g.clone());
    let vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * RMat::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

pub fn cotlar_bound(family: &[DiscOp]) -> Result<CotlarBound> {
    let Some(first) = family.first() else {
        return Ok(CotlarBound { alphas: Vec::new(), bound: 0.0 });
    };
    if family.iter().any(|t| t.grid != first.grid || t.components.len() != first.components.len()) {
        return Err(Error::contract("family members differ in grid or component count"));
    }
    let grams: Vec<RMat> = family.iter().map(DiscOp::gram).collect();
    let roots: Vec<RMat> = grams.iter().map(sqrt_psd).collect();
    let len = family.len();
    let mut alphas = vec![0.0f64; len];
    for i in 0..len {
        for j in i..len {
            // ||T_i* T_j|| directly
            let mut cross = RMat::zeros(first.grid.cells(), first.grid.cells());
            for (a, b) in family[i].components.iter().zip(&family[j].components) {
                cross.gemm_tr(1.0, a, b, 1.0);
            }
            let left = matrix_norm(&cross);
            // ||T_i T_j*||^2 = ||G_i^{1/2} G_j G_i^{1/2}||
            let right = top_eigenvalue(&(&roots[i] * &grams[j] * &roots[i])).max(0.0).sqrt();
            let a = left.max(right).sqrt();
            alphas[j - i] = alphas[j - i].max(a);
        }
    }
    let bound = alphas[0] + 2.0 * alphas[1..].iter().sum::<f64>();
    Ok(CotlarBound { alphas, bound })
}
