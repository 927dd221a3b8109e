use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::Martingale;
use crate::error::{Error, Result};
use crate::filtration::Grid;
use crate::opcore::{max_eigenvalue, CMat, Operator, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BmoNorms {
    pub row: f64,
    pub col: f64,
}

impl BmoNorms {
    pub fn max(&self) -> f64 {
        self.row.max(self.col)
    }
}

/// Martingale BMO: `sup_{n>=1} ||E_n(sum_{k>=n} df_k df_k*)||^{1/2}` and the
/// column analogue. Level 0 is excluded, so constants have norm 0.
pub fn bmo_norms(f: &Martingale) -> Result<BmoNorms> {
    let diffs = f.differences();
    let filt = f.filtration();
    let zero = f.top().zero_like();
    let mut tail_r = zero.clone();
    let mut tail_c = zero;
    let mut out = BmoNorms { row: 0.0, col: 0.0 };
    for n in (1..diffs.len()).rev() {
        let d = &diffs[n];
        tail_r = &tail_r + &(d * &d.adjoint());
        tail_c = &tail_c + &(&d.adjoint() * d);
        let er = filt.cond_expect(&tail_r, n)?.into_hermitian_unchecked();
        let ec = filt.cond_expect(&tail_c, n)?.into_hermitian_unchecked();
        out.row = out.row.max(max_eigenvalue(&er)?.max(0.0).sqrt());
        out.col = out.col.max(max_eigenvalue(&ec)?.max(0.0).sqrt());
    }
    Ok(out)
}

/// Function BMO of a grid-matrix function (one block per cell).
pub fn function_bmo(f: &Operator, grid: &Grid) -> Result<BmoNorms> {
    if f.blocks().len() != grid.cells() {
        return Err(Error::contract("function_bmo needs one block per grid cell"));
    }
    function_bmo_cells(grid, f.blocks())
}

/// Function BMO for rectangular matrix values.
///
/// The supremum runs over all dyadic cubes and over the dyadic grids shifted
/// by half a side along any subset of axes.
pub fn function_bmo_cells(grid: &Grid, cells: &[CMat]) -> Result<BmoNorms> {
    if cells.len() != grid.cells() {
        return Err(Error::contract("one value per grid cell required"));
    }
    let (rows, cols) = cells[0].shape();
    if cells.iter().any(|c| c.shape() != (rows, cols)) {
        return Err(Error::contract("cell values must share a shape"));
    }
    let mut out = BmoNorms { row: 0.0, col: 0.0 };
    for level in 0..grid.depth {
        let half = 1usize << (grid.depth - level - 1);
        let shifts: Vec<[usize; 2]> = if grid.dim == 1 {
            vec![[0, 0], [half, 0]]
        } else {
            vec![[0, 0], [half, 0], [0, half], [half, half]]
        };
        for shift in shifts {
            let mut groups: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
            for cell in 0..grid.cells() {
                let c = grid.coords(cell);
                let w = grid.depth - level;
                let s = grid.side();
                let key = [((c[0] + s - shift[0]) % s) >> w, ((c[1] + s - shift[1]) % s) >> w];
                groups.entry(key).or_default().push(cell);
            }
            for members in groups.values() {
                let (r, c) = oscillation(cells, members)?;
                out.row = out.row.max(r);
                out.col = out.col.max(c);
            }
        }
    }
    Ok(out)
}

fn oscillation(cells: &[CMat], members: &[usize]) -> Result<(f64, f64)> {
    let (rows, cols) = cells[0].shape();
    let inv = C64::new(1.0 / members.len() as f64, 0.0);
    let mut mean = DMatrix::<C64>::zeros(rows, cols);
    for &m in members {
        mean += &cells[m];
    }
    mean *= inv;
    let mut mr = CMat::zeros(rows, rows);
    let mut mc = CMat::zeros(cols, cols);
    for &m in members {
        let d = &cells[m] - &mean;
        mr += &d * d.adjoint();
        mc += d.adjoint() * &d;
    }
    mr *= inv;
    mc *= inv;
    let r = max_eigenvalue(&Operator::from_matrix(mr)?.into_hermitian_unchecked())?;
    let c = max_eigenvalue(&Operator::from_matrix(mc)?.into_hermitian_unchecked())?;
    Ok((r.max(0.0).sqrt(), c.max(0.0).sqrt()))
}
