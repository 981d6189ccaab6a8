use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An invariant such as the average neighbour degree is not defined
    /// for the given graph (typically because it has an isolated vertex).
    #[error("undefined invariant: {0}")]
    UndefinedInvariant(String),

    #[error("parse error{}: {msg}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, msg: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("unknown bound id {0} (valid ids are 1..=68)")]
    UnknownBound(u32),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse {
            line: None,
            msg: msg.into(),
        }
    }
}
