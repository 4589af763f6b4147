use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A generator or loader would exceed the configured vertex cap.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    /// The Newton solver did not reach tolerance; carries its best iterate.
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    Solver {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    /// Input data are inconsistent with an upstream contract (e.g. a bad Green solve).
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A checked inequality failed; `step` names the link in the chain.
    #[error("verification failed at step `{step}`: lhs {lhs:e} vs rhs {rhs:e}")]
    Verification { step: String, lhs: f64, rhs: f64 },

    #[error("counterexample: {message} (witness path {witness:?})")]
    Counterexample {
        message: String,
        witness: Vec<usize>,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, used in structured CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Resource(_) => "resource",
            Error::Argument(_) => "argument",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Solver { .. } => "solver",
            Error::Consistency(_) => "consistency",
            Error::Precondition(_) => "precondition",
            Error::Verification { .. } => "verification",
            Error::Counterexample { .. } => "counterexample",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let location = e
            .position()
            .map(|p| format!("line {}", p.line()))
            .unwrap_or_else(|| "csv".to_string());
        Error::Parse {
            location,
            message: e.to_string(),
        }
    }
}
