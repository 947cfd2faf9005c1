//! Losses, gradient-descent training over network parameters, a
//! brute-force reference optimizer and divergence diagnostics.

mod divergence;
mod loss;
mod oracle;
mod target;
mod train;

pub use divergence::{divergence_report, Verdict, BLOWUP_FACTOR, GRAD_TOL, MIN_TRAJECTORY, PLATEAU_TOL};
pub(crate) use loss::golden_section;
pub use loss::{loss_audit, lp_loss, AuditReport, AuditViolation, LossMeta, LossSpec, PointLoss};
pub use oracle::{oracle_min, oracle_search, OracleResult};
pub use target::Target;
pub use train::{
    error_and_gradient, error_at, fd_gradient, initial_tuple, target_mean, train, GradientMode, InitSpec,
    StepRecord, TrainConfig, Trajectory,
};
