use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    /// A probability ratio was requested with a zero denominator.
    #[error("division domain error: {0}")]
    DivisionDomain(String),
    #[error("replay memory is empty")]
    EmptyMemory,
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("{0}")]
    Config(ConfigError),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("trial with seed {seed} failed: {source}")]
    Trial {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad user-supplied configuration or input.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidInput(_) | Error::Domain(_) | Error::Config(_) | Error::Decode(_) => true,
            Error::Trial { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

/// A configuration problem, optionally tied to a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl Error {
    pub(crate) fn config(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Config(ConfigError {
            line,
            message: message.into(),
        })
    }
}
