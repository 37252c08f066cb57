use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("time {t} s outside trajectory span [0, {duration}] s")]
    OutOfRange { t: f64, duration: f64 },

    #[error("invalid direction: zero or non-finite vector")]
    InvalidDirection,

    #[error("degenerate subspace: interferer directions are linearly dependent")]
    DegenerateSubspace,

    #[error("sampling rate {f_s} Hz is below the required {required:.1} Hz")]
    Sampling { f_s: f64, required: f64 },

    #[error("trace: {0}")]
    Trace(String),

    #[error("internal: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
