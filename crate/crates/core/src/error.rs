use thiserror::Error;

use crate::presentation::BasisIndex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("basis index {0} is not part of this presentation")]
    ForeignIndex(BasisIndex),

    #[error("stage {stage} exceeds the built range 0..={max}")]
    StageOutOfRange { stage: usize, max: usize },

    #[error("height of the zero element is undefined")]
    ZeroElement,

    #[error("element {0} is not in the group at this stage")]
    NotInGroup(String),

    #[error("element is outside the rational span of the candidate basis")]
    OutsideSpan,

    #[error("prime assignment out of range: {0}")]
    PrimeOverflow(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("descriptor error at line {line}: {message}")]
    Descriptor { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
