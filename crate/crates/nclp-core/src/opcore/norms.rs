use super::operator::Operator;
use super::spectral::{singular_values, ENDPOINT_TOL};
use crate::error::{Error, Result};

/// `tau(chi_(lambda, inf)(|f|))`.
pub fn tail_trace(f: &Operator, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::contract(format!("tail_trace needs lambda > 0, got {lambda}")));
    }
    let count = singular_values(f).iter().filter(|&&s| s > lambda + ENDPOINT_TOL).count();
    Ok(count as f64 * f.trace_functional().atom_weight())
}

/// `sup_lambda lambda tau{|f| > lambda}`, attained just below a singular value.
pub fn weak_l1(f: &Operator) -> f64 {
    let w = f.trace_functional().atom_weight();
    singular_values(f)
        .iter()
        .enumerate()
        .map(|(i, &s)| s * (i + 1) as f64 * w)
        .fold(0.0, f64::max)
}

/// Right-continuous nonincreasing step function on `[0, tau(1))`.
///
/// `values[i]` holds on `[breakpoints[i-1], breakpoints[i])`, with an
/// implicit left end 0.
#[derive(Clone, Debug, PartialEq)]
pub struct MuFunction {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl MuFunction {
    pub fn eval(&self, t: f64) -> f64 {
        self.breakpoints
            .iter()
            .position(|&b| t < b)
            .map(|i| self.values[i])
            .unwrap_or(0.0)
    }

    pub fn integral(&self) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            acc += v * (b - prev);
            prev = b;
        }
        acc
    }

    /// `sup_t t mu_t`, approached at the right end of each step.
    pub fn sup_t_mu(&self) -> f64 {
        self.breakpoints.iter().zip(&self.values).map(|(b, v)| b * v).fold(0.0, f64::max)
    }
}

/// Generalized singular values of `a`.
pub fn mu_function(a: &Operator) -> MuFunction {
    let w = a.trace_functional().atom_weight();
    let sv = singular_values(a);
    let scale = sv.first().copied().unwrap_or(0.0);
    let mut breakpoints: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (i, s) in sv.into_iter().enumerate() {
        let t = (i + 1) as f64 * w;
        match values.last() {
            Some(&v) if (v - s).abs() <= 1e-12 * scale.max(1.0) => *breakpoints.last_mut().unwrap() = t,
            _ => {
                values.push(s);
                breakpoints.push(t);
            }
        }
    }
    MuFunction { breakpoints, values }
}

/// `tau(|a|^p)^{1/p}`; `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(a: &Operator, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::OutOfScope(format!("Schatten index p = {p} below 1")));
    }
    let sv = singular_values(a);
    if p.is_infinite() {
        return Ok(sv.first().copied().unwrap_or(0.0));
    }
    let w = a.trace_functional().atom_weight();
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    // scale out the top value to keep s^p in range
    let s: f64 = sv.iter().map(|&x| (x / top).powf(p)).sum::<f64>() * w;
    Ok(top * s.powf(1.0 / p))
}

pub fn op_norm(a: &Operator) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::operator::{CMat, TraceFunctional, C64};

    fn diag(v: &[f64]) -> Operator {
        Operator::from_real_diagonal(v).unwrap()
    }

    #[test]
    fn tail_trace_examples() {
        assert!((tail_trace(&diag(&[3.0, 1.0]), 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(tail_trace(&diag(&[3.0, 1.0]), 3.0).unwrap(), 0.0);
        assert_eq!(tail_trace(&diag(&[0.0, 0.0]), 0.1).unwrap(), 0.0);
        assert!(tail_trace(&diag(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn weak_l1_examples() {
        // max over {1 * 1, 3 * 0.5}
        assert!((weak_l1(&diag(&[3.0, 1.0])) - 1.5).abs() < 1e-14);
        assert!((weak_l1(&Operator::identity(TraceFunctional::Normalized { dim: 3 })) - 1.0).abs() < 1e-14);
        assert_eq!(weak_l1(&diag(&[0.0, 0.0])), 0.0);
    }

    #[test]
    fn mu_examples() {
        let mu = mu_function(&diag(&[3.0, 1.0]));
        assert_eq!(mu.values.len(), 2);
        assert!((mu.eval(0.2) - 3.0).abs() < 1e-14);
        assert!((mu.eval(0.5) - 1.0).abs() < 1e-14);
        assert!((mu.breakpoints[0] - 0.5).abs() < 1e-15);
        let id = mu_function(&Operator::identity(TraceFunctional::Normalized { dim: 4 }));
        assert_eq!(id.values.len(), 1);
        assert!((id.eval(0.99) - 1.0).abs() < 1e-14);
        let zero = mu_function(&diag(&[0.0, 0.0]));
        assert_eq!(zero.eval(0.3), 0.0);
    }

    #[test]
    fn schatten_examples() {
        assert!((schatten_norm(&diag(&[3.0, 1.0]), 1.0).unwrap() - 2.0).abs() < 1e-14);
        let id = Operator::identity(TraceFunctional::Normalized { dim: 3 });
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!((schatten_norm(&id, p).unwrap() - 1.0).abs() < 1e-14);
        }
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let e12 = Operator::from_matrix(m).unwrap();
        assert!((schatten_norm(&e12, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(matches!(schatten_norm(&id, 0.5), Err(Error::OutOfScope(_))));
    }
}
