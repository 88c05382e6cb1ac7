use std::io;

use thiserror::Error;

/// Errors raised by the simulation and verification core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid clip bounds: lower {lower} > upper {upper}")]
    InvalidBounds { lower: f64, upper: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("render error: {0}")]
    Render(String),

    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    #[error("invalid kernel spec: {0}")]
    InvalidKernel(String),

    #[error("invalid growth spec: {0}")]
    InvalidGrowth(String),

    #[error("unsupported growth: {0}")]
    UnsupportedGrowth(String),

    #[error("step size {0} outside the arc-field domain [0, 1]")]
    StepSize(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("expected {expected} channels, got {actual}")]
    ChannelCount { expected: usize, actual: usize },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
