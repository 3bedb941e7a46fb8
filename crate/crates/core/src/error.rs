use thiserror::Error;

/// Errors raised across the simulator and code-construction toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("factor index {index} out of range for a register with {factors} factors")]
    SiteOutOfRange { index: usize, factors: usize },

    #[error("duplicate factor index {0}")]
    DuplicateSite(usize),

    #[error("operator is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("factor {factor} has dimension {dim}; only two-level factors can be measured")]
    NotAQubit { factor: usize, dim: usize },

    #[error("Hilbert space dimension {dim} exceeds the cap of {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("accepting branch has zero probability at round {round}, pair {pair}")]
    ZeroProbabilityBranch { round: usize, pair: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
