use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::HalfSpace;
use crate::landscape::LossSpec;
use crate::quadrature::{error_functional, Measure, VolumeRule};
use crate::response::EffectiveTuple;

/// `N^t(x) = jump·t·(𝔫·x − o)⁺ − jump·t·(𝔫·x − o − 1/t)⁺`: a ramp of width
/// `1/t` that tends to `jump·1_A` off `∂A` as `t → ∞`.
pub fn discontinuity_approximant(h: &HalfSpace, jump: f64, t: f64) -> Result<EffectiveTuple> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("approximant sharpness must be positive, got {t}")));
    }
    EffectiveTuple::new(
        h.dim(),
        vec![h.normal.clone(), h.normal.clone()],
        vec![h.offset, h.offset + 1.0 / t],
        vec![jump * t, -jump * t],
        0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureRow {
    pub t: f64,
    pub err: f64,
    pub param_norm: f64,
}

/// Error and parameter norm of `N^t` for each `t`.
pub fn closure_sweep(h: &HalfSpace, jump: f64, ts: &[f64], loss: &LossSpec, m: &Measure) -> Result<Vec<ClosureRow>> {
    let rule = VolumeRule::for_piecewise(m.dim());
    ts.iter()
        .map(|&t| {
            let n = discontinuity_approximant(h, jump, t)?;
            Ok(ClosureRow {
                t,
                err: error_functional(&n, loss, m, rule)?,
                param_norm: n.to_network().param_norm(),
            })
        })
        .collect()
}

/// Smallest `C` with `|err(t) − err_limit| ≤ C/t` on every row.
pub fn fit_rate_constant(rows: &[ClosureRow], err_limit: f64) -> f64 {
    rows.iter()
        .map(|r| r.t * (r.err - err_limit).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoxDomain, UnitVector};
    use crate::landscape::{lp_loss, Target};

    #[test]
    fn ramp_values() {
        let h = HalfSpace::new(UnitVector::axis(1, 0), 0.2);
        let n = discontinuity_approximant(&h, 2.0, 10.0).unwrap();
        assert!((n.eval(&[0.2 + 0.1]).unwrap() - 2.0).abs() < 1e-12);
        assert!((n.eval(&[0.9]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(n.eval(&[0.2]).unwrap(), 0.0);
        assert_eq!(n.eval(&[-0.5]).unwrap(), 0.0);
        assert!((n.eval(&[0.25]).unwrap() - 1.0).abs() < 1e-12);
        assert!(discontinuity_approximant(&h, 1.0, 0.0).is_err());
    }

    #[test]
    fn error_decays_like_one_over_t() {
        let h = HalfSpace::new(UnitVector::axis(1, 0), 0.0);
        let loss = lp_loss(Target::Step { at: 0.0, height: 1.0 }, 2.0).unwrap();
        let m = Measure::uniform(BoxDomain::cube(1, 1.0));
        let rows = closure_sweep(&h, 1.0, &[10.0, 100.0, 1000.0], &loss, &m).unwrap();
        for r in &rows {
            assert!((r.err - 1.0 / (6.0 * r.t)).abs() < 1e-14, "{r:?}");
        }
        assert!(rows.windows(2).all(|w| w[1].param_norm > w[0].param_norm));
        assert!((fit_rate_constant(&rows, 0.0) - 1.0 / 6.0).abs() < 1e-12);
    }
}
