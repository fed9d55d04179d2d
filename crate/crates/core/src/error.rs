use std::io;

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("trailing bytes after payload: {0} extra")]
    TrailingBytes(usize),

    #[error("value {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },

    #[error("label {label} at index {index} is not a class index in 0..=3")]
    LabelOutOfRange { index: usize, label: u8 },

    #[error("channels at pixel {index} sum to {sum}, expected 1")]
    NotNormalized { index: usize, sum: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty grid: height and width must be at least 1")]
    EmptyGrid,

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("phantom geometry does not fit: {0}")]
    Geometry(String),

    #[error("corruption would not change topology: {0}")]
    NoTopologyChange(String),

    #[error("non-finite {quantity} at iteration {iteration} (term {term})")]
    NonFinite {
        iteration: usize,
        term: String,
        quantity: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
