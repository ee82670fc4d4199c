use thiserror::Error;

/// Errors raised by the computational routines.
///
/// The variants are grouped so that front ends can map them onto distinct
/// exit statuses: `InvalidSymbol`, `Hypothesis` and `CapExceeded` describe
/// inputs that do not satisfy a precondition, the rest are numeric failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("{what} = {requested} exceeds the cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("conditioning failed at position {position}: prefix probability vanished")]
    Conditioning { position: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by inputs violating a documented precondition.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidSymbol(_)
                | Error::Hypothesis(_)
                | Error::CapExceeded { .. }
                | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
