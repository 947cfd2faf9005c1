//! The extended response space in action: hinge families converging to a
//! discontinuous limit, and the κ-perturbation that turns a discontinuous
//! generalized response into a strictly better pair of networks.

mod approximant;
mod decrement;
mod dependence;
mod perturb;

pub use approximant::{closure_sweep, discontinuity_approximant, fit_rate_constant, ClosureRow};
pub use decrement::{
    limit_decrement, q_values, segment_average_loss, verify_improvement, verify_improvement_with, PerturbationReport, IMPROVEMENT_TOL,
    SEGMENT_POINTS,
};
pub use dependence::{find_dependence, Dependence, DependenceVector};
pub use perturb::{kappa_min, kappa_perturb, make_splits, PerturbSign, SplitPart, SplitParts};
