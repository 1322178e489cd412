use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve dimension {0}: only 2 and 3 are supported")]
    InvalidDimension(usize),
    #[error("invalid curve order {0}")]
    InvalidOrder(u32),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("cell {cell:?} lies outside extents {extents:?}")]
    OutOfBounds { cell: Vec<usize>, extents: Vec<usize> },
    #[error("extent mismatch: expected {expected:?}, found {found:?}")]
    ExtentMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("operation requires a {required}D curve, got {found}D")]
    UnsupportedDimension { required: usize, found: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("cannot rescale length {from} to {to}: not an integer multiple")]
    NonDivisible { from: usize, to: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("threshold {0} outside the open interval (0, 1)")]
    InvalidThreshold(f64),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("channel mismatch: expected {expected}, found {found}")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("malformed {format} data: {reason}")]
    Format { format: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
