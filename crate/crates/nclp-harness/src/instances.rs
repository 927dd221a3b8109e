//! Seeded random instances. Trial `i` draws from stream `i` of a ChaCha
//! generator keyed by the run seed, so adding trials leaves earlier ones intact.

use nalgebra::{DMatrix, DVector};
use nclp_core::filtration::Filtration;
use nclp_core::martingale::{CoeffMatrix, Martingale};
use nclp_core::opcore::{CMat, Operator, TraceFunctional, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::Result;

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(normal(rng), normal(rng)))
}

pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| normal(rng))
}

/// Complex Gaussian operator with the layout of `trace`.
pub fn random_operator(rng: &mut impl Rng, trace: TraceFunctional) -> Result<Operator> {
    let b = trace.block_size();
    Ok(match trace {
        TraceFunctional::Normalized { .. } => Operator::from_matrix(gaussian_matrix(rng, b, b))?,
        TraceFunctional::Grid { cells, .. } => {
            Operator::from_blocks((0..cells).map(|_| gaussian_matrix(rng, b, b)).collect())?
        }
    })
}

/// `h = g g*` normalized to `tau(h) = 1` and `f_k = E_k h`.
pub fn random_positive_martingale(rng: &mut impl Rng, filt: &Filtration) -> Result<Martingale> {
    let g = random_operator(rng, filt.trace_functional())?;
    let h = (&g * &g.adjoint()).into_hermitian_unchecked();
    let h = h.scale_real(1.0 / h.trace().re);
    Ok(Martingale::from_top(filt, &h)?)
}

/// Closed martingale of a complex Gaussian operator.
pub fn random_martingale(rng: &mut impl Rng, filt: &Filtration) -> Result<Martingale> {
    let g = random_operator(rng, filt.trace_functional())?;
    Ok(Martingale::from_top(filt, &g)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowNorm {
    /// Square sums drawn uniformly from `[0, 1]`.
    AtMostOne,
    ExactlyOne,
}

pub fn random_coeffs(rng: &mut impl Rng, k_max: usize, m_max: usize, norm: RowNorm) -> Result<CoeffMatrix> {
    let mut e = gaussian_matrix(rng, k_max, m_max);
    for mut row in e.row_iter_mut() {
        let n = row.norm();
        let target = match norm {
            RowNorm::ExactlyOne => 1.0,
            RowNorm::AtMostOne => rng.random::<f64>().sqrt(),
        };
        row *= C64::new(target / n, 0.0);
    }
    Ok(CoeffMatrix::new(e)?)
}

/// SHA-256 over the bit patterns of the values fed in.
#[derive(Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new(label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(label.as_bytes());
        InputDigest(h)
    }

    pub fn real(&mut self, v: f64) -> &mut Self {
        self.0.update(v.to_bits().to_le_bytes());
        self
    }

    pub fn reals<'a>(&mut self, vs: impl IntoIterator<Item = &'a f64>) -> &mut Self {
        for v in vs {
            self.real(*v);
        }
        self
    }

    pub fn matrix(&mut self, m: &CMat) -> &mut Self {
        for z in m.iter() {
            self.real(z.re).real(z.im);
        }
        self
    }

    pub fn operator(&mut self, op: &Operator) -> &mut Self {
        for b in op.blocks() {
            self.matrix(b);
        }
        self
    }

    pub fn coeffs(&mut self, c: &CoeffMatrix) -> &mut Self {
        self.matrix(c.entries())
    }

    pub fn finish(&mut self) -> String {
        hex::encode(std::mem::take(&mut self.0).finalize())
    }
}
