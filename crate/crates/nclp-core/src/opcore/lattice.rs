use super::norms::op_norm;
use super::operator::Operator;
use super::spectral::{eigh, select_eigenvectors, Projection};
use crate::error::{Error, Result};

/// Null-space cut for meets.
pub const MEET_TOL: f64 = 1e-8;

/// Projection onto the intersection of ranges: the null space of `sum (1 - p_i)`.
pub fn proj_meet(ps: &[&Projection]) -> Result<Projection> {
    let Some(first) = ps.first() else {
        return Err(Error::contract("meet of an empty family"));
    };
    let trace = first.trace_functional();
    let mut acc = Operator::zero(trace);
    for p in ps {
        first.ensure_same_layout(p)?;
        acc = &acc + p.complement().as_operator();
    }
    let eig = eigh(&acc.into_hermitian_unchecked())?;
    Ok(select_eigenvectors(trace, &eig, |v| v <= MEET_TOL))
}

/// `1 - meet(1 - p_i)`.
pub fn proj_join(ps: &[&Projection]) -> Result<Projection> {
    let comps: Vec<Projection> = ps.iter().map(|p| p.complement()).collect();
    let refs: Vec<&Projection> = comps.iter().collect();
    Ok(proj_meet(&refs)?.complement())
}

/// `||p f p|| <= tol ||f||`; certifies `supp* f <= 1 - p`.
pub fn annihilation_check(p: &Projection, f: &Operator, tol: f64) -> Result<bool> {
    p.ensure_same_layout(f)?;
    let compressed = f.sandwich(p, p);
    Ok(op_norm(&compressed) <= tol * op_norm(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::operator::{CMat, C64};

    fn proj(m: &[f64]) -> Projection {
        let n = (m.len() as f64).sqrt() as usize;
        let cm = CMat::from_row_slice(n, n, &m.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        Projection::new(Operator::from_matrix(cm).unwrap()).unwrap()
    }

    #[test]
    fn meet_and_join_of_coordinate_projections() {
        let e11 = proj(&[1.0, 0.0, 0.0, 0.0]);
        let e22 = proj(&[0.0, 0.0, 0.0, 1.0]);
        let m = proj_meet(&[&e11, &e11]).unwrap();
        assert!((m.as_operator() - e11.as_operator()).frobenius() < 1e-12);
        assert!(proj_meet(&[&e11, &e22]).unwrap().frobenius() < 1e-12);
        let j = proj_join(&[&e11, &e22]).unwrap();
        assert!((j.as_operator() - &e11.identity_like()).frobenius() < 1e-12);
    }

    #[test]
    fn distinct_lines_meet_trivially() {
        let e11 = proj(&[1.0, 0.0, 0.0, 0.0]);
        let diag_line = proj(&[0.5, 0.5, 0.5, 0.5]);
        assert!(proj_meet(&[&e11, &diag_line]).unwrap().frobenius() < 1e-12);
    }

    #[test]
    fn annihilation_examples() {
        let e22 = proj(&[0.0, 0.0, 0.0, 1.0]);
        let e11 = proj(&[1.0, 0.0, 0.0, 0.0]);
        assert!(annihilation_check(&e22, e11.as_operator(), 1e-12).unwrap());
        let id = Projection::identity(e11.trace_functional());
        assert!(!annihilation_check(&id, e11.as_operator(), 1e-12).unwrap());
    }

    #[test]
    fn meet_rejects_layout_mismatch() {
        let a = proj(&[1.0, 0.0, 0.0, 0.0]);
        let b = Projection::identity(crate::opcore::TraceFunctional::Normalized { dim: 3 });
        assert!(proj_meet(&[&a, &b]).is_err());
        assert!(proj_meet(&[]).is_err());
    }
}
