//! Half-spaces, hyperplanes and the cells they cut out of a box.

mod cells;
mod patch;
mod polygon;

pub use cells::{enumerate_cells, CellSignature, Membership, Sampler};
pub use patch::{hyperplane_patch, Chart};
pub use polygon::{split_box_2d, split_polygon, Polygon};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this to a hyperplane count as lying on it.
pub const TOL_BOUNDARY: f64 = 1e-12;

const TOL_UNIT: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A vector on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `v`; `None` for the zero vector or non-finite input.
    pub fn normalize(v: Vec<f64>) -> Option<Self> {
        let n = norm(&v);
        if !(n.is_finite() && n > 0.0) {
            return None;
        }
        if (n - 1.0).abs() <= TOL_UNIT {
            return Some(Self(v));
        }
        Some(Self(v.into_iter().map(|x| x / n).collect()))
    }

    /// The `i`th standard basis vector of length `dim`.
    pub fn axis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = String;

    fn try_from(v: Vec<f64>) -> std::result::Result<Self, String> {
        Self::normalize(v).ok_or_else(|| "normal must be a finite nonzero vector".to_string())
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Self {
        u.0
    }
}

impl std::ops::Deref for UnitVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inside,
    Boundary,
    Outside,
}

/// The open half-space `{x : normal·x > offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSpace {
    pub normal: UnitVector,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: UnitVector, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// `{x : w·x + c > 0}` rescaled to a unit normal; `None` when `w` vanishes.
    pub fn from_affine(w: &[f64], c: f64) -> Option<Self> {
        let n = norm(w);
        if !(n > 1e-14 && n.is_finite()) {
            return None;
        }
        let normal = UnitVector(w.iter().map(|x| x / n).collect());
        Some(Self::new(normal, -c / n))
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// `normal·x − offset`; the Euclidean distance to the boundary, signed.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn side(&self, x: &[f64]) -> Side {
        let s = self.signed_distance(x);
        if s > TOL_BOUNDARY {
            Side::Inside
        } else if s < -TOL_BOUNDARY {
            Side::Outside
        } else {
            Side::Boundary
        }
    }

    /// Open-set membership; boundary points are outside.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.side(x) == Side::Inside
    }

    /// The complementary open half-space, sharing the same boundary.
    pub fn opposite(&self) -> Self {
        Self::new(self.normal.neg(), -self.offset)
    }

    /// `Some(true)` for the same half-space, `Some(false)` for the opposite
    /// one, `None` if the boundaries differ.
    pub fn boundary_relation(&self, other: &HalfSpace, tol: f64) -> Option<bool> {
        if self.dim() != other.dim() {
            return None;
        }
        let same = self
            .normal
            .iter()
            .zip(other.normal.iter())
            .all(|(a, b)| (a - b).abs() <= tol)
            && (self.offset - other.offset).abs() <= tol;
        if same {
            return Some(true);
        }
        let opp = self
            .normal
            .iter()
            .zip(other.normal.iter())
            .all(|(a, b)| (a + b).abs() <= tol)
            && (self.offset + other.offset).abs() <= tol;
        opp.then_some(false)
    }

    /// Orthogonal projection onto the boundary hyperplane.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let s = self.signed_distance(x);
        x.iter().zip(self.normal.iter()).map(|(xi, ni)| xi - s * ni).collect()
    }
}

/// Compact axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidArgument("box must have dimension >= 1".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument(
                "box bounds must be finite with lower < upper".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    /// `[-r, r]^dim`.
    pub fn cube(dim: usize, r: f64) -> Self {
        Self::new(vec![-r; dim], vec![r; dim]).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l) * (u - l))
            .sum::<f64>()
            .sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }

    /// All `2^dim` corners.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { self.upper[i] } else { self.lower[i] })
                    .collect()
            })
            .collect()
    }

    /// True when the boundary of `h` passes through the open box.
    pub fn cut_by(&self, h: &HalfSpace) -> bool {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in self.vertices() {
            let s = h.signed_distance(&v);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        lo < -TOL_BOUNDARY && hi > TOL_BOUNDARY
    }

    /// Range of `n·x` over the box.
    pub fn projection_range(&self, n: &[f64]) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (i, ni) in n.iter().enumerate() {
            let (a, b) = (ni * self.lower[i], ni * self.upper[i]);
            lo += a.min(b);
            hi += a.max(b);
        }
        (lo, hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + (u - l) * rng.random::<f64>())
            .collect()
    }
}
