use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One failed scenario check, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters for TCL {id}: {reason}")]
    InvalidParams { id: usize, reason: String },

    #[error("invalid bid at position {index}: {reason}")]
    InvalidBid { index: usize, reason: String },

    #[error("bid list misaligned with population: {0}")]
    Misaligned(String),

    #[error("invalid market input: {0}")]
    Market(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scenario has {} violation(s): {}", .0.len(), join(.0))]
    Invalid(Vec<Violation>),

    #[error("market interval {index} is outside the horizon of {len} intervals")]
    OutOfHorizon { index: usize, len: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
