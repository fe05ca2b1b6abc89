use thiserror::Error;

/// Errors raised by the discretisation, decomposition and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular: zero pivot at row {row}")]
    SingularMatrix { row: usize },

    #[error("matrix is not Hermitian (max off-symmetry {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("size cap exceeded: {what} = {size} > {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("local problem on subdomain {subdomain} is singular (pivot row {row})")]
    SingularSubdomain { subdomain: usize, row: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
