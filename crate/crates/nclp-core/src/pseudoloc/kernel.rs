//! Translation-invariant Hilbert-valued kernels on the torus.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelFamily {
    /// `k_m(x,y) = 2^{mn} phi(2^m (x - y))`, `m = 1..=M`, with `phi` odd and
    /// supported in `|t| < 1/2`.
    LpBumps,
    /// `cot(pi (x - y))`, the periodic Hilbert kernel (`n = 1`, one component).
    Hilbert,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HilbertKernel {
    family: KernelFamily,
    dim: usize,
    components: usize,
    gamma: f64,
}

/// Sampled size and smoothness constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelConstants {
    /// `max ||k(t)|| |t|^n`.
    pub size: f64,
    /// `max ||k(t + h) - k(t)|| |t|^{n+gamma} / |h|^gamma` over `|h| <= |t|/2`.
    pub smoothness: f64,
}

/// Hat of height 1 on `|u| < 1/4`, raised to `gamma`.
fn hat(u: f64, gamma: f64) -> f64 {
    let v = (1.0 - 4.0 * u.abs()).max(0.0);
    v.powf(gamma)
}

fn odd_bump(t: f64, gamma: f64) -> f64 {
    hat(t - 0.25, gamma) - hat(t + 0.25, gamma)
}

/// Reduces each coordinate to `[-1/2, 1/2)`.
pub fn wrap(t: [f64; 2]) -> [f64; 2] {
    t.map(|v| v - (v + 0.5).floor())
}

fn linf(t: [f64; 2], dim: usize) -> f64 {
    t[..dim].iter().fold(0.0, |a, v| a.max(v.abs()))
}

impl HilbertKernel {
    pub fn lp_bumps(dim: usize, components: usize, gamma: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) || components == 0 {
            return Err(Error::contract("LP bumps need dim in {1,2} and at least one component"));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::contract(format!("gamma must lie in (0,1], got {gamma}")));
        }
        Ok(HilbertKernel { family: KernelFamily::LpBumps, dim, components, gamma })
    }

    pub fn hilbert() -> Self {
        HilbertKernel { family: KernelFamily::Hilbert, dim: 1, components: 1, gamma: 1.0 }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Components at displacement `t = x - y`; zero at `t = 0`.
    pub fn eval(&self, t: [f64; 2]) -> Vec<f64> {
        let t = wrap(t);
        if linf(t, self.dim) == 0.0 {
            return vec![0.0; self.components];
        }
        match self.family {
            KernelFamily::LpBumps => (1..=self.components)
                .map(|m| {
                    let scale = 2f64.powi(m as i32);
                    let mut v = scale * odd_bump(scale * t[0], self.gamma);
                    if self.dim == 2 {
                        v *= scale * hat(scale * t[1] / 2.0, self.gamma);
                    }
                    v
                })
                .collect(),
            KernelFamily::Hilbert => vec![1.0 / (PI * t[0]).tan()],
        }
    }

    fn norm_at(&self, t: [f64; 2]) -> f64 {
        self.eval(t).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Sampled on a lattice of spacing `1/resolution`, with increments
    /// `h = c t` for `c` in `{±1/2, ±1/4, ±1/8}` plus the orthogonal axis in 2D.
    pub fn sample_constants(&self, resolution: usize) -> KernelConstants {
        let n = self.dim as f64;
        let r = resolution as i64;
        let mut size: f64 = 0.0;
        let mut smooth: f64 = 0.0;
        let ys: Vec<i64> = if self.dim == 2 { (-r / 2..r / 2).collect() } else { vec![0] };
        for &b in &ys {
            for a in -r / 2..r / 2 {
                let t = [a as f64 / r as f64, b as f64 / r as f64];
                let d = linf(t, self.dim);
                if d == 0.0 {
                    continue;
                }
                let kt = self.eval(t);
                size = size.max(self.norm_at(t) * d.powf(n));
                let mut steps = Vec::new();
                for c in [0.5, 0.25, 0.125, -0.5, -0.25, -0.125] {
                    steps.push([c * t[0], c * t[1]]);
                    if self.dim == 2 {
                        steps.push([0.0, c * d]);
                        steps.push([c * d, 0.0]);
                    }
                }
                for h in steps {
                    let hn = linf(h, self.dim);
                    if hn == 0.0 || hn > d / 2.0 {
                        continue;
                    }
                    let kh = self.eval([t[0] + h[0], t[1] + h[1]]);
                    let diff = kt.iter().zip(&kh).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    smooth = smooth.max(diff * d.powf(n + self.gamma) / hn.powf(self.gamma));
                }
            }
        }
        KernelConstants { size, smoothness: smooth }
    }
}
