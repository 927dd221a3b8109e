//! Cuculescu projections, the dyadic `pi_k` partition and triangular splits.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::martingale::Martingale;
use crate::opcore::{
    eigh_block, max_eigenvalue, op_norm, proj_meet, range_basis, schatten_norm, spectral_projection, Interval,
    Operator, Projection, C64, ENDPOINT_TOL,
};

/// Which spectral interval selects `q_n` inside the compression.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Endpoint {
    /// `chi_[0,lambda](q_{n-1} f_n q_{n-1}) meet q_{n-1}`.
    #[default]
    Classical,
    /// `chi_(0,lambda](q_{n-1} f_n q_{n-1})`.
    Literal,
}

/// `q_n(lambda)` for every level `n = 0..=top`, starting from `q_{-1} = 1`.
#[derive(Clone, Debug)]
pub struct CuculescuSequence {
    lambda: f64,
    endpoint: Endpoint,
    projections: Vec<Projection>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuculescuReport {
    /// `max_n ||[q_n, q_{n-1} f_n q_{n-1}]||`.
    pub commutator: f64,
    /// `max_n lambda_max(q_n f_n q_n - lambda q_n)`, clipped at 0.
    pub domination_excess: f64,
    /// `lambda tau(1 - q(lambda))`.
    pub weak_mass: f64,
    /// `sup_n ||f_n||_1`.
    pub sup_l1: f64,
    /// `max_n lambda_max(q_n - q_{n-1})`, clipped at 0.
    pub monotonicity_excess: f64,
}

impl CuculescuReport {
    /// `weak_mass / sup_l1`, 0 when `f = 0`.
    pub fn weak_ratio(&self) -> f64 {
        if self.sup_l1 == 0.0 {
            0.0
        } else {
            self.weak_mass / self.sup_l1
        }
    }
}

pub fn cuculescu(f: &Martingale, lambda: f64) -> Result<CuculescuSequence> {
    cuculescu_with(f, lambda, Endpoint::Classical)
}

pub fn cuculescu_with(f: &Martingale, lambda: f64, endpoint: Endpoint) -> Result<CuculescuSequence> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::contract(format!("lambda must be positive, got {lambda}")));
    }
    if !f.is_positive(1e-10)? {
        return Err(Error::contract("Cuculescu projections need a positive martingale"));
    }
    let trace = f.top().trace_functional();
    let mut prev = Projection::identity(trace);
    let mut projections = Vec::with_capacity(f.values().len());
    for fk in f.values() {
        let next = match endpoint {
            Endpoint::Classical => restricted_below(&prev, fk, lambda)?,
            Endpoint::Literal => {
                let c = fk.sandwich(&prev, &prev).into_hermitian_unchecked();
                spectral_projection(&c, Interval::open_closed(0.0, lambda))?
            }
        };
        projections.push(next.clone());
        prev = next;
    }
    Ok(CuculescuSequence { lambda, endpoint, projections })
}

/// Range of `q` where `q f q <= lambda`: eigen-decomposes `f` compressed to a
/// basis of `range(q)`, so the result is automatically below `q`.
pub(crate) fn restricted_below(q: &Projection, f: &Operator, lambda: f64) -> Result<Projection> {
    let bases = range_basis(q)?;
    let mut per_block = Vec::with_capacity(bases.len());
    for (v, fb) in bases.iter().zip(f.blocks()) {
        if v.ncols() == 0 {
            per_block.push(Vec::new());
            continue;
        }
        let mut m = v.adjoint() * fb * v;
        m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = eigh_block(&m)?;
        let kept: Vec<DVector<C64>> = (0..eig.values.len())
            .filter(|&i| eig.values[i] <= lambda + ENDPOINT_TOL)
            .map(|i| v * eig.vectors.column(i))
            .collect();
        per_block.push(kept);
    }
    Ok(Projection::from_block_vectors(f.trace_functional(), per_block))
}

impl CuculescuSequence {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn endpoint(&self) -> Endpoint {
        self.endpoint
    }

    pub fn projections(&self) -> &[Projection] {
        &self.projections
    }

    /// `q_k` at level `k`; `k = -1` gives the identity.
    pub fn at(&self, k: isize) -> Projection {
        if k < 0 {
            Projection::identity(self.projections[0].trace_functional())
        } else {
            self.projections[k as usize].clone()
        }
    }

    /// `q(lambda) = meet of all q_n`.
    pub fn meet(&self) -> Result<Projection> {
        q_lambda(self)
    }

    /// Checks properties i)-iii) against the martingale that produced the sequence.
    pub fn verify(&self, f: &Martingale) -> Result<CuculescuReport> {
        let mut commutator: f64 = 0.0;
        let mut excess: f64 = 0.0;
        let mut mono: f64 = 0.0;
        let mut prev = self.at(-1);
        for (q, fk) in self.projections.iter().zip(f.values()) {
            let c = fk.sandwich(&prev, &prev);
            commutator = commutator.max(op_norm(&q.commutator(&c)));
            let d = (&fk.sandwich(q, q) - &q.scale_real(self.lambda)).into_hermitian_unchecked();
            excess = excess.max(max_eigenvalue(&d)?);
            let m = (q.as_operator() - prev.as_operator()).into_hermitian_unchecked();
            mono = mono.max(max_eigenvalue(&m)?);
            prev = q.clone();
        }
        let meet = self.meet()?;
        let sup_l1 =
            f.values().iter().map(|v| schatten_norm(v, 1.0)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
        Ok(CuculescuReport {
            commutator,
            domination_excess: excess.max(0.0),
            weak_mass: self.lambda * meet.complement().measure(),
            sup_l1,
            monotonicity_excess: mono.max(0.0),
        })
    }
}

pub fn q_lambda(seq: &CuculescuSequence) -> Result<Projection> {
    let refs: Vec<&Projection> = seq.projections.iter().collect();
    proj_meet(&refs)
}

/// Mutually orthogonal projections indexed `l_min..=l_max` built from an
/// increasing chain of meets `W_l`. Index `l_min` holds the residual `W_{l_min}`,
/// index `k > l_min` holds `W_k - W_{k-1}`.
#[derive(Clone, Debug)]
pub struct PiFamily {
    l_min: i32,
    meets: Vec<Projection>,
    blocks: Vec<Projection>,
}

impl PiFamily {
    /// `meets[i] = W_{l_min + i}`; the last one must be the identity.
    pub fn from_meets(l_min: i32, meets: Vec<Projection>) -> Result<Self> {
        let Some(last) = meets.last() else {
            return Err(Error::contract("empty meet chain"));
        };
        let defect = op_norm(&(last.as_operator() - &last.identity_like()));
        if defect > 1e-8 {
            return Err(Error::contract(format!("top meet is not the identity (defect {defect:e})")));
        }
        let mut blocks = Vec::with_capacity(meets.len());
        for (i, w) in meets.iter().enumerate() {
            let op = if i == 0 { w.as_operator().clone() } else { w.as_operator() - meets[i - 1].as_operator() };
            // snap round-off back onto a projection
            blocks.push(spectral_projection(&op.into_hermitian_unchecked(), Interval::above(0.5))?);
        }
        Ok(PiFamily { l_min, meets, blocks })
    }

    /// Single block equal to the identity.
    pub fn trivial(one: Projection) -> Self {
        PiFamily { l_min: 0, meets: vec![one.clone()], blocks: vec![one] }
    }

    pub fn l_min(&self) -> i32 {
        self.l_min
    }

    pub fn l_max(&self) -> i32 {
        self.l_min + self.blocks.len() as i32 - 1
    }

    /// `(index, pi_index)` in increasing index order, residual first.
    pub fn blocks(&self) -> impl Iterator<Item = (i32, &Projection)> {
        self.blocks.iter().enumerate().map(move |(i, p)| (self.l_min + i as i32, p))
    }

    pub fn pi(&self, k: i32) -> Option<&Projection> {
        if k < self.l_min {
            return None;
        }
        self.blocks.get((k - self.l_min) as usize)
    }

    pub fn residual(&self) -> &Projection {
        &self.blocks[0]
    }

    /// `w_l`; the identity above `l_max`.
    pub fn w(&self, l: i32) -> Result<Projection> {
        if l < self.l_min {
            return Err(Error::contract(format!("w_{l} is below the family range")));
        }
        Ok(self.meets.get((l - self.l_min) as usize).cloned().unwrap_or_else(|| self.meets.last().unwrap().clone()))
    }

    /// `|| sum_k pi_k - 1 ||`.
    pub fn completeness_defect(&self) -> f64 {
        let one = self.blocks[0].identity_like();
        let sum = self.blocks.iter().fold(one.zero_like(), |a, p| &a + p.as_operator());
        op_norm(&(&sum - &one))
    }
}

/// `W_l = meet_{s=l..=l_max} q(2^s)` for `l = l_min..=l_max`, built top down.
pub fn pi_family(f: &Martingale, l_min: i32, l_max: i32) -> Result<PiFamily> {
    if l_min > l_max {
        return Err(Error::contract("empty level range"));
    }
    let norm = op_norm(f.top());
    if norm >= 2f64.powi(l_max) {
        return Err(Error::contract(format!(
            "2^{l_max} does not exceed ||f||_inf = {norm}; the tail meets may not stabilize"
        )));
    }
    let mut meets = Vec::with_capacity((l_max - l_min + 1) as usize);
    let mut acc: Option<Projection> = None;
    for s in (l_min..=l_max).rev() {
        let q = cuculescu(f, 2f64.powi(s))?.meet()?;
        let next = match acc {
            None => q,
            Some(w) => proj_meet(&[&w, &q])?,
        };
        meets.push(next.clone());
        acc = Some(next);
    }
    meets.reverse();
    PiFamily::from_meets(l_min, meets)
}

pub fn w_ell(f: &Martingale, l: i32, l_max: i32) -> Result<Projection> {
    pi_family(f, l, l_max)?.w(l)
}

/// `(sum_{i>=j} pi_i x pi_j, sum_{i<j} pi_i x pi_j)`.
pub fn delta_split(x: &Operator, pi: &PiFamily) -> (Operator, Operator) {
    let left: Vec<Operator> = pi.blocks.iter().map(|p| p.as_operator() * x).collect();
    let mut row = x.zero_like();
    let mut col = x.zero_like();
    for (i, li) in left.iter().enumerate() {
        for (j, pj) in pi.blocks.iter().enumerate() {
            let term = li * pj.as_operator();
            if i >= j {
                row = &row + &term;
            } else {
                col = &col + &term;
            }
        }
    }
    (row, col)
}

/// `sum_{j <= i <= l} pi_i x pi_j`.
pub fn delta_trunc(x: &Operator, pi: &PiFamily, l: i32) -> Operator {
    let mut out = x.zero_like();
    for (i, pi_i) in pi.blocks() {
        if i > l {
            break;
        }
        let li = pi_i.as_operator() * x;
        for (j, pj) in pi.blocks() {
            if j > i {
                break;
            }
            out = &out + &(&li * pj.as_operator());
        }
    }
    out
}

#[cfg(test)]
mod tests;
