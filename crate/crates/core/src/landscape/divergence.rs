use serde::Serialize;

use super::Trajectory;
use crate::error::{Error, Result};

pub const MIN_TRAJECTORY: usize = 100;
/// Gradient norm below which a run counts as stationary.
pub const GRAD_TOL: f64 = 1e-6;
/// Error decrease over the last half that still counts as a plateau.
pub const PLATEAU_TOL: f64 = 1e-6;
/// Parameter-norm growth over the last half that counts as blow-up.
pub const BLOWUP_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    PlateauWithNormBlowup,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::PlateauWithNormBlowup => "plateau_with_norm_blowup",
            Verdict::Undecided => "undecided",
        })
    }
}

/// Classifies a finished run by comparing its midpoint and final records.
pub fn divergence_report(traj: &Trajectory) -> Result<Verdict> {
    let n = traj.len();
    if n < MIN_TRAJECTORY {
        return Err(Error::TrajectoryTooShort { len: n, min: MIN_TRAJECTORY });
    }
    let mid = &traj.records[n / 2];
    let last = &traj.records[n - 1];
    let grew = last.param_norm >= BLOWUP_FACTOR * mid.param_norm;
    if mid.err - last.err < PLATEAU_TOL && grew {
        return Ok(Verdict::PlateauWithNormBlowup);
    }
    if last.grad_norm < GRAD_TOL && !grew && last.param_norm.is_finite() {
        return Ok(Verdict::Converged);
    }
    Ok(Verdict::Undecided)
}
