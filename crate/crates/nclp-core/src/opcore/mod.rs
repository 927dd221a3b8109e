//! Finite-dimensional operator calculus: spectra, traces, Schatten and
//! weak-L1 norms, generalized singular values, projection lattice.

mod lattice;
mod norms;
mod operator;
mod spectral;

pub use lattice::{annihilation_check, proj_join, proj_meet, MEET_TOL};
pub use norms::{mu_function, op_norm, schatten_norm, tail_trace, weak_l1, MuFunction};
pub use operator::{CMat, Operator, TraceFunctional, C64, HERMITIAN_TOL};
pub use spectral::{
    abs, eigen_range, eigh, functional_calculus, max_eigenvalue, min_eigenvalue, singular_values,
    spectral_decompose, spectral_projection, sqrt_positive, BlockEigen, Interval, Projection,
    ENDPOINT_TOL, MERGE_TOL,
};

pub(crate) use spectral::{eigh_block, range_basis};

#[cfg(test)]
mod props;
