use thiserror::Error;

use crate::surface::SurfaceShape;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the chart domain: {reason}")]
    Domain { point: [f64; 3], reason: String },

    #[error("metric is singular or not positive definite at {point:?}")]
    SingularMetric { point: [f64; 3] },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("immersion error: {0}")]
    Immersion(String),

    #[error("node samples have length {got}, grid has {expected} nodes")]
    GridMismatch { expected: usize, got: usize },

    #[error("degenerate Lagrange-multiplier probe: |dA| = {delta_area:e}")]
    DegenerateProbe { delta_area: f64 },

    #[error("finite-difference step {step:e} too small: {detail}")]
    StepTooSmall { step: f64, detail: String },

    #[error("finite-difference step {step:e} too large: {detail}")]
    StepTooLarge { step: f64, detail: String },

    #[error("unsupported moment degree {degree} (maximum is 6)")]
    UnsupportedDegree { degree: usize },

    #[error("rank-deficient least-squares fit: {0}")]
    Fit(String),

    #[error("line search stalled after {attempts} attempts at iteration {iteration}")]
    Stall {
        iteration: usize,
        attempts: usize,
        last: Box<SurfaceShape>,
    },

    #[error("shape left the admissible class at iteration {iteration}: {reason}")]
    Shape {
        iteration: usize,
        reason: String,
        last: Box<SurfaceShape>,
    },
}

impl Error {
    pub(crate) fn domain(point: [f64; 3], reason: impl Into<String>) -> Self {
        Error::Domain {
            point,
            reason: reason.into(),
        }
    }
}
