//! Crate-wide error type.
//!
//! The variants map onto the CLI exit codes: config errors exit with 2,
//! theory-invariant violations (signs of an assembly or solver bug, not user
//! error) with 3, everything else computational with 1.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("integrator error: {0}")]
    Integrator(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("eigensolver error: {0}")]
    Eigen(String),

    #[error("theory invariant violated: {0}")]
    TheoryViolation(String),

    #[error("criterion inapplicable: {0}")]
    Inapplicable(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::TheoryViolation(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
