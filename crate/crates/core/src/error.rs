use thiserror::Error;

/// Errors raised by the geometry pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("derivative order {order} exceeds jet degree {degree}")]
    DegreeOverflow { order: usize, degree: usize },

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("chart failure: {0}")]
    ChartFailure(String),

    #[error("degenerate point at ({x}, {y}): {reason}")]
    DegeneratePoint { x: f64, y: f64, reason: String },

    #[error("left/right labeling failed at ({x}, {y}): {reason}")]
    LabelFailure { x: f64, y: f64, reason: String },

    #[error("jet is not adapted: {0}")]
    NotAdapted(String),

    #[error("indeterminate cross-ratio: {0}")]
    Indeterminate(String),

    #[error("not a node: {0}")]
    NotANode(String),

    #[error("biflecnode overlaps the hyperbonode (f40*f04 = {0:e})")]
    BiflecnodeDegenerate(f64),

    #[error("degenerate node: {0}")]
    DegenerateIndex(String),

    #[error("non-generic node: {0}")]
    NonGeneric(String),

    #[error("refinement failed: {0}")]
    Refinement(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("component coverage: {0}")]
    Coverage(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
