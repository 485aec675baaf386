use thiserror::Error;

use crate::kinematics::ParamError;
use crate::space_data::DataError;

/// Errors raised by the surface models and the scenario machinery.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("frame has no ball position")]
    MissingBall,

    #[error("no disc holder identified for the frame")]
    NoHolder,

    #[error("player index {0} out of range")]
    UnknownPlayer(usize),

    #[error(transparent)]
    Param(#[from] ParamError),

    #[error("invalid model configuration: {0}")]
    Config(String),

    #[error("surface has no unmasked cells")]
    EmptySurface,

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("need at least {needed} frames, got {got}")]
    InsufficientFrames { needed: usize, got: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid geometry mismatch: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Data(#[from] DataError),
}
