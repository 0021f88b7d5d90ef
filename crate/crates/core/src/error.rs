use thiserror::Error;

use crate::dsl::{EvalError, ParseError};
use crate::jet::JetError;
use crate::solver::BvpSolution;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("{what} has length {got}, expected {expected}")]
    Dimension { what: String, expected: usize, got: usize },
    #[error("invalid definition: {0}")]
    InvalidDefinition(String),
    #[error("line {line}: {message}")]
    LagFile { line: usize, message: String },
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("curve is not regular at s = {s}: speed {speed:e} below floor")]
    Regularity { s: f64, speed: f64 },
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    QuadratureNonConvergence { a: f64, b: f64, estimate: f64 },
    #[error("variation does not vanish at the boundary: {0}")]
    BoundaryViolation(String),
    #[error("no admissible sample after {0} attempts")]
    SamplerExhausted(usize),
    #[error("direction lies on a pole of the angle chart")]
    DegenerateDirection,
    #[error("angle Jacobian is ill-conditioned (condition {0:e})")]
    SingularJacobian(f64),
    #[error("inconsistent verdicts: {0}")]
    InconsistentVerdicts(String),
    #[error("gauge error: {0}")]
    Gauge(String),
    #[error("newton iteration did not converge (best scaled residual {:e})", .0.max_residual)]
    NonConvergence(Box<BvpSolution>),
    #[error("iterate lost regularity at iteration {iteration} (speed {speed:e})")]
    RegularityLoss { iteration: usize, speed: f64 },
    #[error("invalid curve: {0}")]
    Curve(String),
    #[error("{context}: {cause}")]
    Sample { context: String, cause: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, context: impl Into<String>) -> Error {
        Error::Sample {
            context: context.into(),
            cause: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
