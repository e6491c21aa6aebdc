use thiserror::Error;

use crate::elliptic::Solution;
use crate::spectral::EigenPair;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid spacing {h} leaves no interior node in the domain")]
    NoInteriorNodes { h: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point ({x}, {y}) is outside the open unit ball")]
    OutsideUnitBall { x: f64, y: f64 },

    #[error("fractional order s = {0} must lie in (0, 1)")]
    InvalidOrder(f64),

    #[error("sample arrays must have length {expected}, got {plus} and {minus}")]
    LengthMismatch {
        expected: usize,
        plus: usize,
        minus: usize,
    },

    #[error("tail truncation must be positive, got {0}")]
    NonpositiveTruncation(f64),

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("elliptic solve did not converge: residual {} after {} outer iterations", .0.report.residual, .0.report.iterations)]
    NotConverged(Box<Solution>),

    #[error("inverse power iteration did not converge: residual {} after {} iterations", .0.residual, .0.iterations)]
    EigenNotConverged(Box<EigenPair>),

    #[error("time step {dt} exceeds the stability bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("start vector is identically zero")]
    DegenerateStart,

    #[error("barrier exponent gamma = {gamma} must lie in (0, 2s - 1) = (0, {upper})")]
    InvalidGamma { gamma: f64, upper: f64 },

    #[error("decay fit needs at least {needed} samples in the window, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("trace reaches zero at t = {extinction_time}; no exponential rate to fit")]
    NonpositiveNorms { extinction_time: f64 },

    #[error("sandwich bound violated at node {node}, t = {t}")]
    SandwichViolated { node: usize, t: f64 },

    #[error("quadrature failed to reach tolerance {tol}: error estimate {estimate}")]
    QuadratureFailed { tol: f64, estimate: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
