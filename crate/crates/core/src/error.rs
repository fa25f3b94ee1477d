use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-uniform abscissa: {0}")]
    NonUniformGrid(String),

    /// A lattice or shift sum whose omitted tail cannot be bounded by the
    /// requested tolerance.
    #[error("truncation failure: {0}")]
    TruncationFailure(String),

    #[error("generator `{0}` has no time-domain representation")]
    MissingTimeDomain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("singular Gram matrix (condition estimate {condition:e})")]
    SingularGram { condition: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationFailure(_)
                | Error::SingularGram { .. }
                | Error::Consistency(_)
                | Error::Resolution(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
