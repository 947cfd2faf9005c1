use serde::{Deserialize, Serialize};

use crate::geometry::{HalfSpace, UnitVector};
use crate::response::GeneralizedResponse;

/// Registry of regression targets. One-dimensional profiles act on `x₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Target {
    /// `|x₁|`
    Abs,
    /// `(x₁ − a)⁺`
    Ramp { a: f64 },
    /// `|x|²`
    Quadratic,
    /// Linear interpolation of `(x₁, y)` knots, constant outside.
    PiecewiseLinear { knots: Vec<[f64; 2]> },
    /// `height · 1{x₁ > at}`
    Step { at: f64, height: f64 },
    Constant { value: f64 },
    /// `slope·x + intercept`
    Affine { slope: Vec<f64>, intercept: f64 },
    /// Any generalized response.
    Response { response: GeneralizedResponse },
}

fn axis_cut(d_in: usize, at: f64) -> HalfSpace {
    HalfSpace::new(UnitVector::axis(d_in, 0), at)
}

impl Target {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Target::Abs => x[0].abs(),
            Target::Ramp { a } => (x[0] - a).max(0.0),
            Target::Quadratic => x.iter().map(|v| v * v).sum(),
            Target::PiecewiseLinear { knots } => interpolate(knots, x[0]),
            Target::Step { at, height } => {
                if x[0] > *at {
                    *height
                } else {
                    0.0
                }
            }
            Target::Constant { value } => *value,
            Target::Affine { slope, intercept } => {
                slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + intercept
            }
            Target::Response { response } => response.eval_unchecked(x),
        }
    }

    /// Hyperplanes across which the target kinks or jumps.
    pub fn cuts(&self, d_in: usize) -> Vec<HalfSpace> {
        match self {
            Target::Abs => vec![axis_cut(d_in, 0.0)],
            Target::Ramp { a } => vec![axis_cut(d_in, *a)],
            Target::PiecewiseLinear { knots } => knots.iter().map(|k| axis_cut(d_in, k[0])).collect(),
            Target::Step { at, .. } => vec![axis_cut(d_in, *at)],
            Target::Response { response } => response.halfspaces(),
            Target::Quadratic | Target::Constant { .. } | Target::Affine { .. } => Vec::new(),
        }
    }

    /// Whether the target is continuous (the regression setting).
    pub fn is_continuous(&self) -> bool {
        match self {
            Target::Step { height, .. } => *height == 0.0,
            Target::Response { response } => response
                .canonical_reduce()
                .map(|(_, c)| c.representable)
                .unwrap_or(false),
            _ => true,
        }
    }
}

fn interpolate(knots: &[[f64; 2]], x: f64) -> f64 {
    match knots {
        [] => 0.0,
        [only] => only[1],
        _ => {
            if x <= knots[0][0] {
                return knots[0][1];
            }
            for w in knots.windows(2) {
                let ([x0, y0], [x1, y1]) = (w[0], w[1]);
                if x <= x1 {
                    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 1.0 };
                    return y0 + t * (y1 - y0);
                }
            }
            knots[knots.len() - 1][1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_values() {
        assert_eq!(Target::Abs.eval(&[-0.5]), 0.5);
        assert!((Target::Ramp { a: 0.2 }.eval(&[0.7, 3.0]) - 0.5).abs() < 1e-15);
        assert_eq!(Target::Quadratic.eval(&[1.0, 2.0]), 5.0);
        let pl = Target::PiecewiseLinear { knots: vec![[-1.0, 0.0], [0.0, 1.0], [1.0, 0.0]] };
        assert!((pl.eval(&[-0.5]) - 0.5).abs() < 1e-15);
        assert_eq!(pl.eval(&[3.0]), 0.0);
        assert_eq!(Target::Step { at: 0.0, height: 2.0 }.eval(&[0.0]), 0.0);
        assert_eq!(Target::Step { at: 0.0, height: 2.0 }.eval(&[0.1]), 2.0);
        assert_eq!(pl.cuts(2).len(), 3);
    }
}
