use thiserror::Error;

/// Errors raised by the sensing model, the formation engine and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A combinatorial search was asked to run past its size guard.
    #[error("capacity exceeded: {what} is {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    /// Invalid configuration; `key` names the offending setting.
    #[error("invalid configuration for `{key}`: {message}")]
    Config { key: String, message: String },

    /// An internal invariant was broken (e.g. the formation iteration guard tripped).
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
