use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("payload needs {needed_bits} bits but the symbol holds {capacity_bits}")]
    CapacityExceeded { needed_bits: usize, capacity_bits: usize },

    #[error("uncorrectable Reed-Solomon block: {0}")]
    Uncorrectable(&'static str),

    #[error("format information unreadable in both copies")]
    FormatInfo,

    #[error("format information says {found}, expected {expected}")]
    FormatMismatch { expected: String, found: String },

    #[error("data stream malformed: {0}")]
    Bitstream(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch { expected: (u32, u32), found: (u32, u32) },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stylizer failed: {0}")]
    Stylizer(String),

    #[error("{remaining} modules still non-robust after {iterations} iterations")]
    NonConvergence { iterations: usize, remaining: usize },

    #[error("sidecar: {0}")]
    Sidecar(String),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the decode chain (format info, RS, bitstream).
    pub fn is_decode_failure(&self) -> bool {
        matches!(
            self,
            Error::Uncorrectable(_) | Error::FormatInfo | Error::FormatMismatch { .. } | Error::Bitstream(_)
        )
    }
}
