//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by construction, simulation, and reconstruction code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("non-physical density matrix: {0}")]
    NonPhysical(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("inconsistent table: {0}")]
    InconsistentTable(String),
    #[error("missing outcome rows: {0}")]
    MissingOutcome(String),
    #[error("reconstruction failed: {0}")]
    Reconstruction(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
