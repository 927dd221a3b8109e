//! Finite filtrations with trace-preserving conditional expectations.
//!
//! Every filtration starts at level 0 and ends at `top()`, where `E_top`
//! is the identity. Level 0 is the scalars (tensor, corner) or the
//! constant matrix-valued functions (grid).

mod dyadic;

pub use dyadic::{dilate_union, DyadicCube, Grid};

use crate::error::{Error, Result};
use crate::opcore::{CMat, Operator, TraceFunctional, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgebraSpec {
    /// `M_2^{(x) N}`, filtered by the first `n` factors.
    TensorDyadic { levels: usize },
    /// `L_inf(torus^n) (x) M_d` on a depth-K dyadic grid.
    GridMatrix { dim: usize, depth: usize, size: usize },
    /// `M_n` filtered by top-left corners plus the remaining diagonal.
    Corner { size: usize },
}

impl AlgebraSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AlgebraSpec::TensorDyadic { levels } if (1..=10).contains(&levels) => Ok(()),
            AlgebraSpec::GridMatrix { dim, depth, size } if size >= 1 => Grid::new(dim, depth).map(|_| ()),
            AlgebraSpec::Corner { size } if size >= 1 => Ok(()),
            _ => Err(Error::contract(format!("unsupported algebra {self:?}"))),
        }
    }

    pub fn total_dim(&self) -> usize {
        match *self {
            AlgebraSpec::TensorDyadic { levels } => 1 << levels,
            AlgebraSpec::GridMatrix { dim, depth, size } => (1 << (dim * depth)) * size,
            AlgebraSpec::Corner { size } => size,
        }
    }

    pub fn trace_functional(&self) -> TraceFunctional {
        match *self {
            AlgebraSpec::GridMatrix { dim, depth, size } => {
                TraceFunctional::Grid { cells: 1 << (dim * depth), block: size }
            }
            _ => TraceFunctional::Normalized { dim: self.total_dim() },
        }
    }

    pub fn top_level(&self) -> usize {
        match *self {
            AlgebraSpec::TensorDyadic { levels } => levels,
            AlgebraSpec::GridMatrix { depth, .. } => depth,
            AlgebraSpec::Corner { size } => size,
        }
    }

    pub fn grid(&self) -> Option<Grid> {
        match *self {
            AlgebraSpec::GridMatrix { dim, depth, .. } => Some(Grid { dim, depth }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    spec: AlgebraSpec,
}

pub fn build_filtration(spec: AlgebraSpec) -> Result<Filtration> {
    spec.validate()?;
    Ok(Filtration { spec })
}

impl Filtration {
    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    pub fn top(&self) -> usize {
        self.spec.top_level()
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.top()
    }

    pub fn trace_functional(&self) -> TraceFunctional {
        self.spec.trace_functional()
    }

    pub fn grid(&self) -> Option<Grid> {
        self.spec.grid()
    }

    pub fn identity(&self) -> Operator {
        Operator::identity(self.trace_functional())
    }

    pub fn zero(&self) -> Operator {
        Operator::zero(self.trace_functional())
    }

    /// `E_k(f)`.
    pub fn cond_expect(&self, f: &Operator, level: usize) -> Result<Operator> {
        if level > self.top() {
            return Err(Error::contract(format!("level {level} outside 0..={}", self.top())));
        }
        if f.trace_functional() != self.trace_functional() {
            return Err(Error::contract("operator does not live in the filtration's algebra"));
        }
        let herm = f.is_hermitian();
        let out = if level == self.top() {
            f.clone()
        } else {
            match self.spec {
                AlgebraSpec::TensorDyadic { levels } => tensor_expect(f, levels, level),
                AlgebraSpec::GridMatrix { dim, depth, .. } => grid_expect(f, Grid { dim, depth }, level),
                AlgebraSpec::Corner { .. } => corner_expect(f, level),
            }
        };
        Ok(if herm { out.into_hermitian_unchecked() } else { out })
    }

    /// Conditional expectation that reads `E_{-1} = 0`, the convention behind `f_0 = 0`.
    pub fn cond_expect_or_zero(&self, f: &Operator, level: isize) -> Result<Operator> {
        if level < 0 {
            Ok(f.zero_like())
        } else {
            self.cond_expect(f, level as usize)
        }
    }

    /// Whether `f` belongs to the level-k subalgebra, up to `tol` in Frobenius norm.
    pub fn is_adapted(&self, f: &Operator, level: usize, tol: f64) -> Result<bool> {
        let e = self.cond_expect(f, level)?;
        Ok((&e - f).frobenius() <= tol * f.frobenius().max(1.0))
    }
}

fn tensor_expect(f: &Operator, levels: usize, level: usize) -> Operator {
    let x = f.block(0);
    let inner = 1usize << (levels - level);
    let outer = 1usize << level;
    let mut reduced = CMat::zeros(outer, outer);
    for a in 0..outer {
        for b in 0..outer {
            let mut s = C64::new(0.0, 0.0);
            for c in 0..inner {
                s += x[(a * inner + c, b * inner + c)];
            }
            reduced[(a, b)] = s / inner as f64;
        }
    }
    let id = CMat::identity(inner, inner);
    Operator::from_matrix(reduced.kronecker(&id)).expect("finite")
}

fn grid_expect(f: &Operator, grid: Grid, level: usize) -> Operator {
    let b = f.trace_functional().block_size();
    let mut blocks = vec![CMat::zeros(b, b); grid.cells()];
    for cube in grid.cubes(level) {
        let cells = cube.cells(&grid);
        let mut mean = CMat::zeros(b, b);
        for &c in &cells {
            mean += f.block(c);
        }
        mean /= C64::new(cells.len() as f64, 0.0);
        for &c in &cells {
            blocks[c] = mean.clone();
        }
    }
    Operator::from_blocks(blocks).expect("finite")
}

fn corner_expect(f: &Operator, level: usize) -> Operator {
    let x = f.block(0);
    let n = x.nrows();
    if level == 0 {
        return Operator::scalar(f.trace_functional(), f.trace());
    }
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if (i < level && j < level) || i == j {
                out[(i, j)] = x[(i, j)];
            }
        }
    }
    Operator::from_matrix(out).expect("finite")
}
