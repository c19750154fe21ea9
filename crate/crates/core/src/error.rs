use std::path::PathBuf;

use crate::geometry::ComplexVector;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("no convergence: {message}")]
    Convergence {
        message: String,
        best: Option<ComplexVector>,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("invalid functional: {0}")]
    Functional(String),

    #[error("outside disk domain: |t| = {modulus} > radius {radius}")]
    OutsideDisk { modulus: f64, radius: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("cannot parse `{input}`: bad key `{key}`")]
    Parse { input: String, key: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
