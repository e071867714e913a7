use thiserror::Error;

use crate::hdrio::{LdrError, RgbeError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error(
        "dimension mismatch: expected {expected_width}x{expected_height}, got {width}x{height}"
    )]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },

    #[error("image is not LDR: sample {value} at ({x}, {y}) exceeds 1")]
    NotLdr { x: usize, y: usize, value: f64 },

    #[error("exposure stack is empty")]
    EmptyStack,

    #[error("exposure values must be strictly increasing")]
    UnorderedExposures,

    #[error("stack has {images} images but {evs} exposure values")]
    EvCountMismatch { images: usize, evs: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown fusion backend `{0}`")]
    UnknownBackend(String),

    #[error("pyramid depth {depth} is out of range 1..={max} for a {width}x{height} image")]
    PyramidDepth {
        depth: usize,
        max: usize,
        width: usize,
        height: usize,
    },

    #[error("image of {width}x{height} is smaller than the {window}x{window} window")]
    ImageTooSmall {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("radiance map has no positive luminance")]
    ZeroRadiance,

    #[error(transparent)]
    Rgbe(#[from] RgbeError),

    #[error(transparent)]
    Ldr(#[from] LdrError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
