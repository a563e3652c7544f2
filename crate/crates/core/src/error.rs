use thiserror::Error;

/// Errors raised by constructors, samplers and the command-line layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A taboo sample carried more mass than the caller-supplied bound.
    #[error("invalid mass bound: sample mass {mass} exceeds bound {bound}")]
    InvalidBound { mass: u64, bound: u64 },

    /// An estimator has no value on the given data (empty conditioning
    /// event or zero denominator).
    #[error("undefined estimate: {0}")]
    Undefined(String),

    #[error("censored after {attempts} attempts")]
    Censored { attempts: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
