use thiserror::Error;

use crate::stream::PayloadWidth;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("not a BMP file (bad magic)")]
    BadMagic,
    #[error("unsupported BMP variant: {0}")]
    UnsupportedFormat(String),
    #[error("BMP data truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("image dimensions differ: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("pipeline has no processing elements")]
    EmptyPipeline,
    #[error(
        "port width mismatch between `{upstream}` ({produced:?}) and `{downstream}` ({expected:?})"
    )]
    WidthMismatch {
        upstream: String,
        downstream: String,
        produced: PayloadWidth,
        expected: PayloadWidth,
    },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("element `{element}` violated the handshake: {detail}")]
    HandshakeViolation { element: String, detail: String },
    #[error("deadlock: no progress for {idle} cycles (at cycle {cycle})")]
    Deadlock { cycle: u64, idle: u64 },

    #[error("frame length mismatch: configured for {expected} pixels, frame ended after {actual}")]
    ConfigMismatch { expected: usize, actual: usize },
    #[error("image width {width} exceeds line buffer depth {depth}")]
    WidthTooLarge { width: usize, depth: usize },
    #[error("image is {width}x{height}; at least 3x3 is required")]
    TooSmall { width: usize, height: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("report serialization failed: {0}")]
    Serialize(String),
}
