use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::opcore::{CMat, Operator, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn random_matrix_op(rng: &mut impl Rng, n: usize) -> Operator {
    Operator::from_matrix(gaussian(rng, n, n)).unwrap()
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> Operator {
    random_matrix_op(rng, n).real_part()
}

pub fn random_like(rng: &mut impl Rng, like: &Operator) -> Operator {
    let tr = like.trace_functional();
    let b = tr.block_size();
    let blocks: Vec<CMat> = (0..tr.block_count()).map(|_| gaussian(rng, b, b)).collect();
    if tr.block_count() == 1 && matches!(tr, crate::opcore::TraceFunctional::Normalized { .. }) {
        Operator::from_matrix(blocks.into_iter().next().unwrap()).unwrap()
    } else {
        Operator::from_blocks(blocks).unwrap()
    }
}

/// Random positive `h` with `tau(h) = 1` and its closed martingale.
pub fn random_positive_martingale(
    rng: &mut impl Rng,
    filt: &crate::filtration::Filtration,
) -> crate::martingale::Martingale {
    let g = random_like(rng, &filt.identity());
    let h = (&g * &g.adjoint()).into_hermitian_unchecked();
    let t = h.trace().re;
    let h = h.scale_real(1.0 / t);
    crate::martingale::Martingale::from_top(filt, &h).unwrap()
}

pub fn random_martingale(rng: &mut impl Rng, filt: &crate::filtration::Filtration) -> crate::martingale::Martingale {
    let g = random_like(rng, &filt.identity());
    crate::martingale::Martingale::from_top(filt, &g).unwrap()
}

pub fn random_unit_rows(rng: &mut impl Rng, k: usize, m: usize) -> crate::martingale::CoeffMatrix {
    let mut e = gaussian(rng, k, m);
    for mut row in e.row_iter_mut() {
        let n = row.norm();
        row /= C64::new(n, 0.0);
    }
    crate::martingale::CoeffMatrix::new(e).unwrap()
}
