use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid weight function: {0}")]
    InvalidWeight(String),

    #[error("quadrature did not converge: requested tolerance {requested:e}, achieved {achieved:e}")]
    QuadratureNonConvergence { requested: f64, achieved: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed CSV input: {0}")]
    Csv(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
