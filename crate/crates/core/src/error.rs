use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants map onto process exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An instance is too large for exhaustive evaluation or materialization.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An iterative procedure failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An internal invariant was violated; the result would be meaningless.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    /// The integer search for a self-loop/bristle gadget ran out of candidates.
    #[error("approximation failure: best residual {best_residual:.3e} with (x, y) = ({x}, {y}) exceeds tolerance {tolerance:.3e}")]
    Approximation {
        x: u64,
        y: u64,
        best_residual: f64,
        tolerance: f64,
    },

    /// A certificate or bound check did not hold.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// Exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Json(_) => 2,
            Error::Capacity(_) => 3,
            Error::Verification(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
