use thiserror::Error;

use crate::landscape::Trajectory;
use crate::response::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("half-spaces {0} and {1} share a boundary hyperplane")]
    DuplicateBoundary(usize, usize),

    #[error("hyperplane does not meet the interior of the domain")]
    NoIntersection,

    #[error("invalid generalized response: {}", format_violations(.0))]
    InvalidResponse(Vec<Violation>),

    #[error("neurons {0} and {1} share a breakline")]
    SharedBreakline(usize, usize),

    #[error("point lies within {distance:e} of breakline {neuron}")]
    OnBreakline { neuron: usize, distance: f64 },

    #[error("cell signature has length {got}, response has {expected} summands")]
    SignatureMismatch { expected: usize, got: usize },

    #[error("integrand or density returned a non-finite value at {0:?}")]
    NonFiniteIntegrand(Vec<f64>),

    #[error("loss exponent must exceed 1, got {0}")]
    BadExponent(f64),

    #[error("training loss became non-finite at step {step}")]
    NonFiniteLoss {
        step: usize,
        trajectory: Box<Trajectory>,
    },

    #[error("evaluation budget of {0} exhausted before any local search converged")]
    BudgetExceeded(usize),

    #[error("oracle search is limited to d <= 2 neurons and d_in <= 2, got d = {d}, d_in = {d_in}")]
    OracleTooLarge { d: usize, d_in: usize },

    #[error("trajectory has {len} records, diagnostics need at least {min}")]
    TrajectoryTooShort { len: usize, min: usize },

    #[error("index {index} out of range for {len} summands")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("split reconstruction failed: max deviation {0:e}")]
    ReconstructionFailed(f64),

    #[error("kappa {kappa} does not exceed the guard value {min}")]
    KappaTooSmall { kappa: f64, min: f64 },

    #[error("point is {0:e} away from the breakline")]
    OffBreakline(f64),

    #[error("multiplicity-2 normals are linearly independent; no dependence vector")]
    NoDependence,

    #[error("loss fails the strict-convexity audit")]
    NotStrictlyConvex,

    #[error("summand {0} lies outside the dependence support")]
    NotInSupport(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
