use std::io;

use thiserror::Error;

/// Errors raised by the classifier system and its experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, dimension mismatches or malformed config input.
    #[error("configuration error: {0}")]
    Config(String),
    /// The learning engine reached a state it cannot continue from.
    #[error("engine error: {0}")]
    Engine(String),
    /// A snapshot or metrics file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn engine(msg: impl Into<String>) -> Self {
        Error::Engine(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
