//! Error type shared by every numerical, model and constraint operator.
//!
//! The executor turns these into plan-addressable feedback, so every variant
//! has a stable `code()` string that decomposers can match on.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("actual value at index {index} is zero; percentage error undefined")]
    ZeroDenominator { index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("differencing a single value leaves nothing")]
    EmptyAfterDiff,

    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),

    #[error("lag {lag} too large for series of length {len}")]
    LagTooLarge { lag: usize, len: usize },

    #[error("series is constant; {0} undefined")]
    ConstantSeries(&'static str),

    #[error("series too short: need at least {need}, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    #[error("window {window} larger than series length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("test `{0}` requires a second series")]
    MissingSecondSeries(&'static str),

    #[error("give exactly one of `threshold` or `percentile`")]
    BothOrNeitherGiven,

    #[error("regression design is singular: {0}")]
    SingularRegression(String),

    #[error("history too short: need at least {need}, got {got}")]
    HistoryTooShort { need: usize, got: usize },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("ramp-rate constraint needs an anchor value")]
    MissingAnchor,

    #[error("constraints cannot be satisfied jointly: {0}")]
    InfeasibleConstraint(String),

    #[error("question contains more than one constraint clause")]
    AmbiguousConstraint,

    #[error("relation matrix has a cycle among off-diagonal edges")]
    CyclicRelation,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("retrieval failed: {message}")]
    Retrieval { code: &'static str, message: String },
}

impl OpError {
    /// Stable machine-readable code used in feedback messages and traces.
    pub fn code(&self) -> &'static str {
        match self {
            OpError::LengthMismatch { .. } => "LengthMismatch",
            OpError::ZeroDenominator { .. } => "ZeroDenominator",
            OpError::ShapeMismatch(_) => "ShapeMismatch",
            OpError::DomainError(_) => "DomainError",
            OpError::EmptyAfterDiff => "EmptyAfterDiff",
            OpError::DuplicateColumn(_) => "DuplicateColumn",
            OpError::LagTooLarge { .. } => "LagTooLarge",
            OpError::ConstantSeries(_) => "ConstantSeries",
            OpError::SeriesTooShort { .. } => "SeriesTooShort",
            OpError::WindowTooLarge { .. } => "WindowTooLarge",
            OpError::MissingSecondSeries(_) => "MissingSecondSeries",
            OpError::BothOrNeitherGiven => "BothOrNeitherGiven",
            OpError::SingularRegression(_) => "SingularRegression",
            OpError::HistoryTooShort { .. } => "HistoryTooShort",
            OpError::UnknownModel(_) => "UnknownModel",
            OpError::MissingAnchor => "MissingAnchor",
            OpError::InfeasibleConstraint(_) => "InfeasibleConstraint",
            OpError::AmbiguousConstraint => "AmbiguousConstraint",
            OpError::CyclicRelation => "CyclicRelation",
            OpError::InvalidArgument(_) => "InvalidArgument",
            OpError::Retrieval { code, .. } => code,
        }
    }
}

pub type OpResult<T> = Result<T, OpError>;

pub(crate) fn ensure_same_len(left: usize, right: usize) -> OpResult<()> {
    if left != right {
        return Err(OpError::LengthMismatch { left, right });
    }
    Ok(())
}
