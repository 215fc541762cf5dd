use thiserror::Error;

use crate::interval::IntervalError;

/// Failure to evaluate a target shape, either at a point or over a box.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}
