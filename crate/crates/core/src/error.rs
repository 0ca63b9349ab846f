//! Crate-wide error type.

use std::time::Duration;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or dimensions of the inputs disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A fairness measure needs a nonempty index subset that is empty.
    #[error("empty index subset: {0}")]
    EmptyGroup(&'static str),

    /// A trainer was handed a selection with no points.
    #[error("empty selection: no points to train on")]
    EmptySelection,

    /// A trainer needs both classes but the selected subset has one.
    #[error("one-class selection: selected subset contains a single class")]
    OneClassSelection,

    /// An exhaustive routine was asked to run above its size cap.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    /// The black-box scorer violated the line protocol.
    #[error("scorer protocol violation: {0}")]
    Protocol(String),

    /// The black-box scorer did not answer in time.
    #[error("scorer timed out after {0:?}")]
    Timeout(Duration),

    /// The black-box scorer returned a score outside [0, 1].
    #[error("score out of range [0, 1]: {0}")]
    ScoreOutOfRange(f64),

    /// A required column is missing from the input file.
    #[error("missing column: {0}")]
    MissingColumn(String),

    /// A numeric column holds a value that does not parse.
    #[error("non-numeric value in column {column}: {value:?}")]
    NonNumericValue { column: String, value: String },

    /// A categorical column holds a level the encoder has never seen.
    #[error("unseen category in column {column}: {value:?}")]
    UnseenCategory { column: String, value: String },

    /// Underlying I/O or CSV failure.
    #[error("data error: {0}")]
    Data(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
