//! Network configurations, effective tuples and generalized responses.

pub(crate) mod generalized;
mod network;
mod reduce;

pub use generalized::{CaseTag, GeneralizedResponse, Summand, Violation};
pub use network::{EffectiveTuple, NetworkConfig};
pub use reduce::ResponseClass;

/// Tolerance for the boundary-containment and parallelism checks.
pub const TOL_CONTAINMENT: f64 = 1e-10;

/// Singular values at or below this count as zero in rank decisions.
pub const TOL_RANK: f64 = 1e-10;

/// Minimum distance from every breakline for [`EffectiveTuple::gradient`].
pub const GRADIENT_CLEARANCE: f64 = 1e-6;
