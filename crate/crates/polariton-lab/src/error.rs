//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Configuration file could not be parsed or violates the schema.
    #[error("config error: {0}")]
    Config(String),

    /// A model definition is physically or structurally invalid.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A requested basis exceeds the configured size budget.
    #[error("dimension overflow: requested {requested}, limit {limit}")]
    DimensionOverflow { requested: usize, limit: usize },

    /// Caller passed inconsistent arguments (basis/matter mismatch etc.).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An assembled matrix failed the Hermiticity contract.
    #[error("operator '{label}' is not Hermitian: relative defect {defect:.3e}")]
    NonHermitian { label: String, defect: f64 },

    /// Iterative eigensolver did not reach the requested residual.
    #[error("eigensolver did not converge: {message} (best residuals {residuals:?})")]
    Convergence { message: String, residuals: Vec<f64> },

    /// Dense solve refused because the matrix exceeds the dense limit.
    #[error("dense solve refused: dim {dim} exceeds limit {limit}")]
    DenseLimit { dim: usize, limit: usize },

    /// LAPACK returned a nonzero info code.
    #[error("LAPACK {routine} failed with info={info}")]
    Lapack { routine: &'static str, info: i32 },

    /// Time propagation failed at a specific step.
    #[error("propagation failed at step {step}: {message}")]
    Propagation { step: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code category used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::InvalidModel(_)
            | Error::DimensionOverflow { .. }
            | Error::InvalidArgument(_)
            | Error::NonHermitian { .. } => 3,
            Error::Convergence { .. }
            | Error::DenseLimit { .. }
            | Error::Lapack { .. }
            | Error::Propagation { .. } => 4,
            Error::Io(_) | Error::Serialize(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
