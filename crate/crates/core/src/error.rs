use crate::field::Shape;
use thiserror::Error;

/// Library error type. Everything that can go wrong at this scale is a
/// caller mistake (bad shapes, bad parameters) or a numeric guard.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: Shape, right: Shape },

    #[error("spatial dimensions must be even, got {0}")]
    OddDimensions(Shape),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("timestep {t} out of range for schedule of length {len}")]
    TimestepOutOfRange { t: usize, len: usize },

    #[error("numeric guard: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
