use thiserror::Error;

/// Crate-wide error type. Exit-code mapping for the CLI lives in the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("layout mismatch: expected {expected}, got {got}")]
    LayoutMismatch { expected: String, got: String },
    #[error("residual undefined: field has zero norm")]
    UndefinedResidual,
    #[error("operator contract violated: {0}")]
    ContractViolation(String),
    #[error("solver failure: {message} ({diagnostics})")]
    SolverFailure { message: String, diagnostics: String },
    #[error("check failure: {0}")]
    CheckFailure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn solver(message: impl Into<String>, diagnostics: impl Into<String>) -> Self {
        Error::SolverFailure {
            message: message.into(),
            diagnostics: diagnostics.into(),
        }
    }
}
