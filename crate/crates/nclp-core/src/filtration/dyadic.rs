use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Uniform dyadic grid of `2^{nK}` cells on the torus `[0,1)^n`.
///
/// Cells are indexed with axis 0 varying fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    pub dim: usize,
    pub depth: usize,
}

impl Grid {
    pub fn new(dim: usize, depth: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::contract(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if depth == 0 || depth * dim > 24 {
            return Err(Error::contract(format!("unsupported grid depth {depth}")));
        }
        Ok(Grid { dim, depth })
    }

    /// Cells per axis.
    pub fn side(&self) -> usize {
        1 << self.depth
    }

    pub fn cells(&self) -> usize {
        1 << (self.dim * self.depth)
    }

    /// Side length of a cell.
    pub fn cell_size(&self) -> f64 {
        1.0 / self.side() as f64
    }

    /// Lebesgue measure of a cell.
    pub fn cell_measure(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn coords(&self, cell: usize) -> [usize; 2] {
        let s = self.side();
        [cell % s, if self.dim == 2 { cell / s } else { 0 }]
    }

    pub fn index(&self, coords: [usize; 2]) -> usize {
        let s = self.side();
        coords[0] % s + if self.dim == 2 { (coords[1] % s) * s } else { 0 }
    }

    pub fn midpoint(&self, cell: usize) -> [f64; 2] {
        let c = self.coords(cell);
        let h = self.cell_size();
        [(c[0] as f64 + 0.5) * h, (c[1] as f64 + 0.5) * h]
    }

    /// Signed per-axis offset in cells, reduced to `[-side/2, side/2)`.
    pub fn offset(&self, from: usize, to: usize) -> [i64; 2] {
        let s = self.side() as i64;
        let a = self.coords(from);
        let b = self.coords(to);
        let mut out = [0i64; 2];
        for i in 0..self.dim {
            let mut d = (b[i] as i64 - a[i] as i64).rem_euclid(s);
            if d >= s / 2 {
                d -= s;
            }
            out[i] = d;
        }
        out
    }

    /// Torus l-infinity distance between cell midpoints.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let o = self.offset(a, b);
        let m = o[0].unsigned_abs().max(o[1].unsigned_abs());
        m as f64 * self.cell_size()
    }

    /// The level-k cube containing a cell.
    pub fn cube_of(&self, cell: usize, level: usize) -> DyadicCube {
        let shift = self.depth - level;
        let c = self.coords(cell);
        DyadicCube { level, corner: [c[0] >> shift, if self.dim == 2 { c[1] >> shift } else { 0 }] }
    }

    /// Flat index of the level-k cube containing `cell`.
    pub fn cube_index(&self, cell: usize, level: usize) -> usize {
        self.cube_of(cell, level).flat_index(self)
    }

    pub fn cubes(&self, level: usize) -> Vec<DyadicCube> {
        let per_axis = 1usize << level;
        let count = if self.dim == 2 { per_axis * per_axis } else { per_axis };
        (0..count)
            .map(|i| DyadicCube { level, corner: [i % per_axis, if self.dim == 2 { i / per_axis } else { 0 }] })
            .collect()
    }
}

/// Dyadic cube of side `2^{-level}` with integer corner coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    pub level: usize,
    pub corner: [usize; 2],
}

impl DyadicCube {
    pub fn new(grid: &Grid, level: usize, corner: [usize; 2]) -> Result<Self> {
        if level > grid.depth {
            return Err(Error::contract(format!("cube level {level} exceeds grid depth {}", grid.depth)));
        }
        let m = 1usize << level;
        let second = if grid.dim == 2 { corner[1] % m } else { 0 };
        Ok(DyadicCube { level, corner: [corner[0] % m, second] })
    }

    pub fn side(&self) -> f64 {
        1.0 / (1u64 << self.level) as f64
    }

    pub fn measure(&self, grid: &Grid) -> f64 {
        self.side().powi(grid.dim as i32)
    }

    pub fn flat_index(&self, grid: &Grid) -> usize {
        let m = 1usize << self.level;
        self.corner[0] + if grid.dim == 2 { self.corner[1] * m } else { 0 }
    }

    /// The dyadic cube of double size containing this one.
    pub fn father(&self) -> Result<DyadicCube> {
        if self.level == 0 {
            return Err(Error::contract("the level-0 cube has no dyadic father on the torus"));
        }
        Ok(DyadicCube { level: self.level - 1, corner: [self.corner[0] >> 1, self.corner[1] >> 1] })
    }

    /// Children one level down (2^n of them).
    pub fn children(&self, grid: &Grid) -> Vec<DyadicCube> {
        let l = self.level + 1;
        let [a, b] = self.corner;
        if grid.dim == 1 {
            vec![DyadicCube { level: l, corner: [2 * a, 0] }, DyadicCube { level: l, corner: [2 * a + 1, 0] }]
        } else {
            let mut out = Vec::with_capacity(4);
            for dy in 0..2 {
                for dx in 0..2 {
                    out.push(DyadicCube { level: l, corner: [2 * a + dx, 2 * b + dy] });
                }
            }
            out
        }
    }

    /// Cells of the grid lying in the cube, ascending.
    pub fn cells(&self, grid: &Grid) -> Vec<usize> {
        let w = 1usize << (grid.depth - self.level);
        let x0 = self.corner[0] * w;
        let y0 = self.corner[1] * w;
        let mut out = Vec::new();
        if grid.dim == 1 {
            out.extend(x0..x0 + w);
        } else {
            for y in y0..y0 + w {
                for x in x0..x0 + w {
                    out.push(grid.index([x, y]));
                }
            }
        }
        out
    }

    pub fn contains_cell(&self, grid: &Grid, cell: usize) -> bool {
        grid.cube_of(cell, self.level) == *self
    }

    /// Cells of the concentric cube `delta Q` (torus wrap), ascending.
    pub fn concentric_father(&self, grid: &Grid, delta: usize) -> Result<Vec<usize>> {
        if delta % 2 == 0 {
            return Err(Error::contract(format!("concentric dilation factor must be odd, got {delta}")));
        }
        let r = (delta / 2) as i64;
        let m = 1i64 << self.level;
        let mut set = BTreeSet::new();
        let ys: Vec<i64> = if grid.dim == 2 { (-r..=r).collect() } else { vec![0] };
        for dy in &ys {
            for dx in -r..=r {
                let cx = (self.corner[0] as i64 + dx).rem_euclid(m) as usize;
                let cy = (self.corner[1] as i64 + dy).rem_euclid(m) as usize;
                let cube = DyadicCube { level: self.level, corner: [cx, cy] };
                set.extend(cube.cells(grid));
            }
        }
        Ok(set.into_iter().collect())
    }
}

/// Union of `delta`-dilations of a family of cubes.
pub fn dilate_union(grid: &Grid, cubes: &[DyadicCube], delta: usize) -> Result<Vec<usize>> {
    let mut set = BTreeSet::new();
    for q in cubes {
        set.extend(q.concentric_father(grid, delta)?);
    }
    Ok(set.into_iter().collect())
}
