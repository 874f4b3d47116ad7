use thiserror::Error;

/// Errors produced by the analysis, codec and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configured size or enumeration budget would be exceeded.
    #[error("budget exceeded: {what} (requested {requested}, limit {limit})")]
    Budget {
        what: &'static str,
        requested: f64,
        limit: f64,
    },

    /// A numerical routine failed to produce a finite result.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
