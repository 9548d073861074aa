use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("dimension {n} outside the supported range {min}..={max}")]
    DimensionOutOfRange { n: u32, min: u32, max: u32 },

    #[error("point index {bits} out of range for n = {n}")]
    PointOutOfRange { n: u32, bits: u64 },

    #[error("invalid distance parameter {0}: must lie strictly between 0 and 1")]
    InvalidEpsilon(String),

    #[error("{what} is {value}, above the cap of {cap}")]
    CapExceeded { what: &'static str, value: u64, cap: u64 },

    #[error("malformed truth table: {0}")]
    TruthTable(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("operation not supported for property {0}")]
    UnsupportedProperty(String),

    #[error("inversion of zero in GF(2^{k})")]
    ZeroInverse { k: u32 },

    #[error("repeated abscissa {0} in interpolation points")]
    RepeatedAbscissa(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
