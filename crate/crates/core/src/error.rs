use thiserror::Error;

/// Errors raised by the smoothing library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {value} lies outside the knot domain [{lower}, {upper}]")]
    Domain { value: f64, lower: f64, upper: f64 },

    #[error("invalid knot vector: {0}")]
    KnotVector(String),

    #[error("invalid control net: {0}")]
    ControlNet(String),

    #[error("refinement error: {0}")]
    Refinement(String),

    #[error("degenerate metric at s = ({s1}, {s2}): det G = {det:e}")]
    DegenerateMetric { s1: f64, s2: f64, det: f64 },

    #[error("point inversion failed after {iterations} iterations (distance {residual:e})")]
    Inversion { residual: f64, iterations: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("GCV undefined: N = {n} does not exceed trace(S) = {trace}")]
    GcvUndefined { n: usize, trace: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
