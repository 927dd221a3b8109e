//! Experiment registry, deterministic instance generation and reports for the
//! `nclp` command line tool.

pub mod config;
pub mod experiments;
pub mod instances;
pub mod report;

pub use config::{Algebra, Experiment, ExperimentConfig, Format, KernelChoice};
pub use experiments::run;
pub use report::{Assertion, Report, Trial};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] nclp_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serialize(String),
}

impl HarnessError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(e) if e.is_numeric() => 3,
            HarnessError::Io(_) | HarnessError::Serialize(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
