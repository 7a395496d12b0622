use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input text, inconsistent dimensions, invalid parameter combinations.
    #[error("config error: {0}")]
    Config(String),

    /// Cholesky hit a nonpositive pivot; the matrix is not positive definite
    /// (or an incomplete factorization broke down past recovery).
    #[error("not positive definite: pivot {value:e} at index {index}")]
    NotPositiveDefinite { index: usize, value: f64 },

    /// Breakdown of an iterative or approximate numerical procedure.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code convention: 1 for configuration problems, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 1,
            Error::NotPositiveDefinite { .. } | Error::Numerical(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
