use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::BoxDomain;

/// Registry of continuous densities; each is normalized to a probability
/// density on its box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Density {
    Uniform,
    TruncatedGaussian { center: Vec<f64>, sigma: f64 },
    /// `exp(−1 / (1 − |x − c|²/r²))` inside the ball, zero outside.
    Bump { center: Vec<f64>, radius: f64 },
}

/// A finite measure `h(x) dx` on a compact box.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub domain: BoxDomain,
    pub density: Density,
    scale: f64,
}

fn bump_raw(center: &[f64], radius: f64, x: &[f64]) -> f64 {
    let r2 = x
        .iter()
        .zip(center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / (radius * radius);
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

impl Measure {
    pub fn new(domain: BoxDomain, density: Density) -> Result<Self> {
        let d = domain.dim();
        let scale = match &density {
            Density::Uniform => 1.0 / domain.volume(),
            Density::TruncatedGaussian { center, sigma } => {
                if center.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: center.len() });
                }
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidArgument("gaussian sigma must be positive".into()));
                }
                let n = Normal::new(0.0, *sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
                let mass: f64 = (0..d)
                    .map(|i| n.cdf(domain.upper[i] - center[i]) - n.cdf(domain.lower[i] - center[i]))
                    .product();
                if !(mass > 0.0) {
                    return Err(Error::InvalidArgument("gaussian has no mass on the box".into()));
                }
                (2.0 * std::f64::consts::PI * sigma * sigma).powf(-(d as f64) / 2.0) / mass
            }
            Density::Bump { center, radius } => {
                if center.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: center.len() });
                }
                if !(*radius > 0.0) {
                    return Err(Error::InvalidArgument("bump radius must be positive".into()));
                }
                let raw = Measure { domain: domain.clone(), density: density.clone(), scale: 1.0 };
                let res = if d <= 2 { 96 } else { 32 };
                let mass = super::integrate_volume(&|_: &[f64]| 1.0, &raw, super::VolumeRule::TensorGauss { points: res })?.value;
                if !(mass > 0.0) {
                    return Err(Error::InvalidArgument("bump has no mass on the box".into()));
                }
                1.0 / mass
            }
        };
        Ok(Self { domain, density, scale })
    }

    pub fn uniform(domain: BoxDomain) -> Self {
        Self::new(domain, Density::Uniform).expect("uniform density is always valid")
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Density `h(x)`; zero outside the box.
    pub fn density_at(&self, x: &[f64]) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        self.scale
            * match &self.density {
                Density::Uniform => 1.0,
                Density::TruncatedGaussian { center, sigma } => {
                    let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                    (-0.5 * r2 / (sigma * sigma)).exp()
                }
                Density::Bump { center, radius } => bump_raw(center, *radius, x),
            }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_volume, VolumeRule};

    #[test]
    fn densities_are_normalized() {
        let d = BoxDomain::cube(2, 1.0);
        for dens in [
            Density::Uniform,
            Density::TruncatedGaussian { center: vec![0.2, -0.1], sigma: 0.5 },
            Density::Bump { center: vec![0.0, 0.3], radius: 0.8 },
        ] {
            let m = Measure::new(d.clone(), dens).unwrap();
            let mass = integrate_volume(&|_: &[f64]| 1.0, &m, VolumeRule::TensorGauss { points: 64 })
                .unwrap()
                .value;
            assert!((mass - 1.0).abs() < 1e-4, "{mass}");
        }
    }

    #[test]
    fn uniform_value() {
        let m = Measure::uniform(BoxDomain::cube(2, 1.0));
        assert_eq!(m.density_at(&[0.1, 0.2]), 0.25);
        assert_eq!(m.density_at(&[1.5, 0.2]), 0.0);
    }
}
