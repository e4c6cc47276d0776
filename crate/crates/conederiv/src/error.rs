//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("insufficient samples after domain filtering: {survivors} survived, {required} required")]
    InsufficientSamples { survivors: usize, required: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("knot times must be strictly decreasing: t[{index}] = {t_prev} followed by {t_next}")]
    RatioViolation {
        index: usize,
        t_prev: f64,
        t_next: f64,
    },

    #[error("knot lists must have equal length >= 2 (got {knots_t} times, {knots_x} points)")]
    LengthMismatch { knots_t: usize, knots_x: usize },

    #[error("evaluation time {t} outside [0, {t_max}]")]
    OutOfRange { t: f64, t_max: f64 },

    #[error("first velocity coordinate too small for straightening: |{v1}| < 1e-8")]
    FirstCoordinateDegenerate { v1: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown fixture: {0}")]
    UnknownFixture(String),
}
