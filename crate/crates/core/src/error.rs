use thiserror::Error;

/// Errors raised by the fusion core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point is behind the camera (z = {z})")]
    PointBehindCamera { z: f64 },
    #[error("no box corner lies in front of the camera")]
    FullyBehindCamera,
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
    #[error("rotation is not orthonormal with determinant +1")]
    InvalidRotation,
    #[error("invalid box: {0}")]
    InvalidBox(&'static str),
    #[error("position has zero length in the ground plane")]
    DegeneratePosition,
    #[error("estimated depth must be positive, got {0}")]
    InvalidDepth(f64),
    #[error("2D box has zero area")]
    DegenerateBox,
    #[error("train-mode frustum needs a ground-truth 3D box")]
    MissingGroundTruth,
    #[error("record {index} has no secondary head output")]
    MissingSecondary { index: usize },
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
