use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Validation(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("series expansion requires 0 < alpha < 1, got alpha = {0}")]
    UnsupportedExpansion(f64),

    #[error("quadrature did not converge: estimate {value}, error estimate {abs_error} after {subdivisions} subdivisions")]
    Quadrature {
        value: f64,
        abs_error: f64,
        subdivisions: usize,
    },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("optimizer failed on all {starts} starts: {reason}")]
    NonConvergence { starts: usize, reason: String },

    #[error("dataset rejected: {0}")]
    Dataset(String),
}

pub type Result<T> = std::result::Result<T, Error>;
