use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates a documented constraint.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure broke down (factorization, non-finite values, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("linear solve did not converge after {iterations} iterations (relative update {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape { expected: expected.to_string(), found: found.to_string() }
    }
}
