pub mod cuculescu;
pub mod czkit;
pub mod error;
pub mod filtration;
pub mod gundy;
pub mod martingale;
pub mod opcore;
pub mod pseudoloc;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil;
