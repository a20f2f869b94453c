use thiserror::Error;

/// Errors raised by the model, estimators and experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Brute-force enumeration refused because the item universe is too large.
    #[error("brute force refused: {n_items} items exceeds the limit of {limit}")]
    TooLarge { n_items: usize, limit: usize },

    /// An experiment configuration failed validation.
    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
