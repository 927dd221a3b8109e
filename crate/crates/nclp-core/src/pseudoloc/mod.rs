//! Discretized Hilbert-valued Calderón–Zygmund operators on the dyadic torus
//! and the pseudo-localization machinery built on them.

mod checks;
mod discop;
mod kernel;

pub use checks::*;
pub use discop::*;
pub use kernel::*;
