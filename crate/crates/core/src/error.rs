use thiserror::Error;

/// Errors raised by the deconvolution toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("filter not invertible: |h[{index}]| = {value:e} is below {min_abs:e}")]
    NotInvertible {
        index: usize,
        value: f64,
        min_abs: f64,
    },

    #[error("graph rejected: {0}")]
    Rejected(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
