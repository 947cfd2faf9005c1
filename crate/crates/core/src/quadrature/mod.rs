//! Measures, volume and hyperplane-surface quadrature, and the error
//! functional `∫ L(x, R(x)) dμ(x)`.
//!
//! Integrands declare the hyperplanes across which they may jump or kink
//! ([`Field::cuts`]). For `d_in ≤ 2` the tensor-Gauss rule subdivides the box
//! exactly along those hyperplanes and integrates cell by cell, so piecewise
//! polynomial integrands are integrated to rounding error. In higher
//! dimensions pass a [`VolumeRule::Midpoint`] rule instead.

mod measure;
mod rules;

pub use measure::{Density, Measure};
pub use rules::{surface_nodes, volume_nodes, Nodes};
pub(crate) use rules::gauss_legendre;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{hyperplane_patch, HalfSpace};
use crate::landscape::LossSpec;
use crate::par;

/// A scalar field, with the hyperplanes across which it may be non-smooth.
pub trait Field: Sync {
    fn value(&self, x: &[f64]) -> f64;

    fn cuts(&self) -> Vec<HalfSpace> {
        Vec::new()
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Field for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// A closure together with its known breaklines.
pub struct Piecewise<F> {
    pub f: F,
    pub cuts: Vec<HalfSpace>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Field for Piecewise<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn cuts(&self) -> Vec<HalfSpace> {
        self.cuts.clone()
    }
}

/// Resolution of the volume rule for unstructured integrands.
pub const DEFAULT_TENSOR_RESOLUTION_2D: usize = 256;
pub const DEFAULT_TENSOR_RESOLUTION_3D: usize = 64;

/// Per-cell Gauss order used when cell structure is known.
pub const DEFAULT_CELL_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VolumeRule {
    /// `points` Gauss-Legendre nodes per axis, per cell when cuts are known
    /// and `d_in ≤ 2`.
    TensorGauss { points: usize },
    /// `points` cell midpoints per axis over the whole box.
    Midpoint { points: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

impl VolumeRule {
    /// Cell-exact Gauss for `d_in ≤ 2`, high-resolution midpoint above.
    pub fn for_piecewise(d_in: usize) -> Self {
        if d_in <= 2 {
            VolumeRule::TensorGauss { points: DEFAULT_CELL_ORDER }
        } else {
            VolumeRule::Midpoint { points: DEFAULT_TENSOR_RESOLUTION_3D }
        }
    }

    /// Whole-box rule at the default resolution.
    pub fn default_tensor(d_in: usize) -> Self {
        VolumeRule::TensorGauss {
            points: if d_in <= 2 { DEFAULT_TENSOR_RESOLUTION_2D } else { DEFAULT_TENSOR_RESOLUTION_3D },
        }
    }

    fn coarsened(self) -> Self {
        match self {
            VolumeRule::TensorGauss { points } => VolumeRule::TensorGauss { points: (points / 2).max(1) },
            VolumeRule::Midpoint { points } => VolumeRule::Midpoint { points: (points / 2).max(1) },
            mc => mc,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        let ok = match *self {
            VolumeRule::TensorGauss { points } | VolumeRule::Midpoint { points } => points >= 1,
            VolumeRule::MonteCarlo { samples, .. } => samples >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("volume rule resolution too small: {self:?}")))
        }
    }
}

/// Gauss-Legendre nodes per axis on the section chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceRule {
    pub points: usize,
}

impl Default for SurfaceRule {
    fn default() -> Self {
        Self { points: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err_estimate: f64,
}

fn first_non_finite(nodes: &Nodes, f: &dyn Field) -> Option<Vec<f64>> {
    (0..nodes.len())
        .find(|&i| !f.value(nodes.point(i)).is_finite())
        .map(|i| nodes.point(i).to_vec())
}

/// `Σ w_i f(x_i)` over a node set; non-finite values are reported.
pub fn integrate_nodes(f: &dyn Field, nodes: &Nodes) -> Result<f64> {
    let v = par::sum(nodes.len(), |i| nodes.weights[i] * f.value(nodes.point(i)));
    if v.is_finite() {
        return Ok(v);
    }
    Err(Error::NonFiniteIntegrand(
        first_non_finite(nodes, f).unwrap_or_default(),
    ))
}

/// `∫ f h dx` over the box, with a refinement or sample-variance error estimate.
pub fn integrate_volume(f: &dyn Field, m: &Measure, rule: VolumeRule) -> Result<Estimate> {
    let cuts = f.cuts();
    let nodes = volume_nodes(m, rule, &cuts)?;
    let value = integrate_nodes(f, &nodes)?;
    let err_estimate = match rule {
        VolumeRule::MonteCarlo { .. } => {
            let n = nodes.len() as f64;
            let sq = par::sum(nodes.len(), |i| {
                let t = n * nodes.weights[i] * f.value(nodes.point(i));
                t * t
            });
            let var = (sq / n - value * value).max(0.0) * n / (n - 1.0);
            (var / n).sqrt()
        }
        _ => {
            let coarse = volume_nodes(m, rule.coarsened(), &cuts)?;
            (value - integrate_nodes(f, &coarse)?).abs()
        }
    };
    Ok(Estimate { value, err_estimate })
}

/// `∫_{H ∩ box} f h dσ` with `dσ` the `(d_in − 1)`-dimensional Hausdorff
/// measure; a point evaluation when `d_in = 1`.
pub fn integrate_surface(f: &dyn Field, plane: &HalfSpace, m: &Measure, rule: SurfaceRule) -> Result<f64> {
    let nodes = surface_nodes(plane, m, rule, &f.cuts())?;
    integrate_nodes(f, &nodes)
}

/// `∫ L(x, R(x)) dμ(x)`.
pub fn error_functional(response: &dyn Field, loss: &LossSpec, m: &Measure, rule: VolumeRule) -> Result<f64> {
    let mut cuts = response.cuts();
    cuts.extend(loss.cuts(m.dim()));
    let integrand = Piecewise {
        f: |x: &[f64]| loss.value(x, response.value(x)),
        cuts,
    };
    let nodes = volume_nodes(m, rule, &integrand.cuts)?;
    integrate_nodes(&integrand, &nodes)
}

/// `μ({x : |normal·x − offset| < ε})` for each width.
pub fn hyperplane_mass(plane: &HalfSpace, m: &Measure, widths: &[f64]) -> Result<Vec<f64>> {
    if plane.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: plane.dim() });
    }
    widths
        .iter()
        .map(|&eps| slab_mass(plane, m, eps))
        .collect()
}

fn slab_mass(plane: &HalfSpace, m: &Measure, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Ok(0.0);
    }
    let upper = HalfSpace::new(plane.normal.clone(), plane.offset + eps);
    let lower = HalfSpace::new(plane.normal.clone(), plane.offset - eps);
    if m.dim() <= 2 {
        let slab = Piecewise {
            f: |x: &[f64]| if plane.signed_distance(x).abs() < eps { 1.0 } else { 0.0 },
            cuts: vec![upper, lower],
        };
        return Ok(integrate_volume(&slab, m, VolumeRule::TensorGauss { points: 16 })?.value);
    }
    // Layer the slab into parallel sections.
    let layers = rules::gauss_legendre(8);
    let mut total = 0.0;
    for &(t, w) in layers.iter() {
        let s = eps * t;
        let shifted = HalfSpace::new(plane.normal.clone(), plane.offset + s);
        let area = match integrate_surface(&|_: &[f64]| 1.0, &shifted, m, SurfaceRule::default()) {
            Ok(a) => a,
            Err(Error::NoIntersection) => 0.0,
            Err(e) => return Err(e),
        };
        total += eps * w * area;
    }
    Ok(total)
}

/// Sampled check that `h > 0` somewhere on `H ∩ box`; a sufficient condition
/// for the hyperplane to carry regular points of the measure.
pub fn density_positive_on(plane: &HalfSpace, m: &Measure, samples: usize, seed: u64) -> Result<bool> {
    let chart = hyperplane_patch(plane, &m.domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = chart.param_dim();
    for _ in 0..samples.max(1) {
        let s: Vec<f64> = (0..k)
            .map(|i| chart.lower[i] + (chart.upper[i] - chart.lower[i]) * rand::Rng::random::<f64>(&mut rng))
            .collect();
        let x = chart.point(&s);
        if m.domain.contains(&x) && m.density_at(&x) > 0.0 {
            return Ok(true);
        }
    }
    Ok(false)
}
