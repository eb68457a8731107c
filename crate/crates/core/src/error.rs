use std::path::PathBuf;

use crate::returns::TimescaleSpec;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("invalid session calendar: {0}")]
    Calendar(String),

    #[error("events are not in (date, timestamp) order at index {index}")]
    Unsorted { index: usize },

    #[error("event at index {index} lies outside every continuous session")]
    OutOfSession { index: usize },

    #[error("series mixes instruments {first:?} and {other:?}")]
    MixedInstruments { first: String, other: String },

    #[error("degenerate return series for instrument {instrument}: zero standard deviation")]
    DegenerateSeries { instrument: String },

    #[error("instrument {instrument}: need at least 2 returns to standardize, got {got}")]
    TooFewReturns { instrument: String, got: usize },

    #[error("cannot pool series with timescales {expected} and {found}")]
    MixedTimescales {
        expected: TimescaleSpec,
        found: TimescaleSpec,
    },

    #[error("trading frequency is undefined for an empty series")]
    EmptySeries,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("insufficient tail: {needed} samples of the requested sign required, got {got}")]
    InsufficientTail { needed: usize, got: usize },

    #[error("insufficient scaling range: {needed} points required inside [{lo}, {hi}], got {got}")]
    InsufficientRange {
        lo: f64,
        hi: f64,
        needed: usize,
        got: usize,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a human-readable location such as an instrument or timescale.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
