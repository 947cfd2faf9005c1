use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{TOL_CONTAINMENT, TOL_RANK};
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, CellSignature, HalfSpace, TOL_BOUNDARY};
use crate::quadrature::Field;

/// Which of the three admissibility alternatives a response claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    /// `m0 = 1`.
    A,
    /// Normals of the multiplicity-2 summands are linearly dependent.
    B,
    /// The affine part is constant.
    C,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::A => "a",
            CaseTag::B => "b",
            CaseTag::C => "c",
        })
    }
}

/// `1_{A}(x) (delta·x + jump)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summand {
    pub halfspace: HalfSpace,
    pub delta: Vec<f64>,
    pub jump: f64,
    pub multiplicity: u8,
}

impl Summand {
    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.delta, x) + self.jump
    }

    /// True if `delta·x + jump` vanishes on the boundary of the half-space,
    /// i.e. the summand is continuous.
    pub fn boundary_contained(&self) -> bool {
        let n = &self.halfspace.normal;
        let along = dot(&self.delta, n);
        let perp = self
            .delta
            .iter()
            .zip(n.iter())
            .map(|(d, ni)| (d - along * ni).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = 1.0 + norm(&self.delta) + self.jump.abs();
        perp <= TOL_CONTAINMENT * scale
            && (along * self.halfspace.offset + self.jump).abs() <= TOL_CONTAINMENT * scale
    }
}

/// `𝔞(x) + Σ_k 1_{A_k}(x)(δ_k·x + 𝔟_k)` with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralizedResponse {
    pub affine_linear: Vec<f64>,
    pub affine_const: f64,
    pub summands: Vec<Summand>,
    pub m0: u8,
    pub case_tag: CaseTag,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Dimension { what: String, expected: usize, got: usize },
    SharedBoundary(usize, usize),
    BadMultiplicity(usize, u8),
    BadM0(u8),
    Containment(usize),
    NoCase,
    TagUnsatisfied(CaseTag),
    NonFinite,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dimension { what, expected, got } => {
                write!(f, "{what} has dimension {got}, expected {expected}")
            }
            Violation::SharedBoundary(i, j) => write!(
                f,
                "pairwise distinct boundaries: summands {i} and {j} share a boundary"
            ),
            Violation::BadMultiplicity(k, m) => {
                write!(f, "summand {k} has multiplicity {m}, must be 1 or 2")
            }
            Violation::BadM0(m) => write!(f, "m0 = {m}, must be 0 or 1"),
            Violation::Containment(k) => write!(
                f,
                "summand {k} has multiplicity 1 but its boundary is not contained in the zero set of delta·x + jump"
            ),
            Violation::NoCase => write!(
                f,
                "none of the cases holds: m0 = 0, multiplicity-2 normals independent, affine part not constant"
            ),
            Violation::TagUnsatisfied(t) => write!(f, "declared case ({t}) does not hold"),
            Violation::NonFinite => write!(f, "non-finite coefficient"),
        }
    }
}

/// Numerical rank of the matrix whose columns are `vectors`.
pub(crate) fn rank(vectors: &[&[f64]]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let rows = vectors[0].len();
    let m = DMatrix::from_fn(rows, vectors.len(), |i, j| vectors[j][i]);
    m.singular_values().iter().filter(|s| **s > TOL_RANK).count()
}

impl GeneralizedResponse {
    /// The constant function `c` (no summands, case (c)).
    pub fn constant(d_in: usize, c: f64) -> Self {
        Self {
            affine_linear: vec![0.0; d_in],
            affine_const: c,
            summands: Vec::new(),
            m0: 0,
            case_tag: CaseTag::C,
        }
    }

    pub fn with_summands(mut self, summands: Vec<Summand>) -> Self {
        self.summands = summands;
        self
    }

    pub fn d_in(&self) -> usize {
        self.affine_linear.len()
    }

    pub fn affine(&self, x: &[f64]) -> f64 {
        dot(&self.affine_linear, x) + self.affine_const
    }

    /// Open half-space convention: boundary points get indicator 0.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d_in() {
            return Err(Error::DimensionMismatch {
                expected: self.d_in(),
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.affine(x)
            + self
                .summands
                .iter()
                .filter(|s| s.halfspace.contains(x))
                .map(|s| s.value(x))
                .sum::<f64>()
    }

    pub fn halfspaces(&self) -> Vec<HalfSpace> {
        self.summands.iter().map(|s| s.halfspace.clone()).collect()
    }

    pub fn dimension_budget(&self) -> usize {
        self.m0 as usize + self.summands.iter().map(|s| s.multiplicity as usize).sum::<usize>()
    }

    pub fn is_affine_constant(&self) -> bool {
        self.affine_linear.iter().all(|a| a.abs() <= TOL_CONTAINMENT)
    }

    /// Whether the multiplicity-2 normals are linearly dependent.
    pub fn double_normals_dependent(&self) -> bool {
        let normals: Vec<&[f64]> = self
            .summands
            .iter()
            .filter(|s| s.multiplicity == 2)
            .map(|s| s.halfspace.normal.as_slice())
            .collect();
        !normals.is_empty() && rank(&normals) < normals.len()
    }

    pub fn case_holds(&self, tag: CaseTag) -> bool {
        match tag {
            CaseTag::A => self.m0 == 1,
            CaseTag::B => self.double_normals_dependent(),
            CaseTag::C => self.is_affine_constant(),
        }
    }

    /// All invariant violations; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let d = self.d_in();
        let finite = self.affine_linear.iter().all(|a| a.is_finite())
            && self.affine_const.is_finite()
            && self.summands.iter().all(|s| {
                s.jump.is_finite()
                    && s.halfspace.offset.is_finite()
                    && s.delta.iter().all(|x| x.is_finite())
            });
        if !finite {
            v.push(Violation::NonFinite);
        }
        for (k, s) in self.summands.iter().enumerate() {
            for (what, got) in [("delta", s.delta.len()), ("normal", s.halfspace.dim())] {
                if got != d {
                    v.push(Violation::Dimension {
                        what: format!("summand {k} {what}"),
                        expected: d,
                        got,
                    });
                }
            }
        }
        if !v.is_empty() {
            return v;
        }
        for i in 0..self.summands.len() {
            for j in i + 1..self.summands.len() {
                if self.summands[i]
                    .halfspace
                    .boundary_relation(&self.summands[j].halfspace, TOL_BOUNDARY)
                    .is_some()
                {
                    v.push(Violation::SharedBoundary(i, j));
                }
            }
        }
        if self.m0 > 1 {
            v.push(Violation::BadM0(self.m0));
        }
        for (k, s) in self.summands.iter().enumerate() {
            match s.multiplicity {
                1 if !s.boundary_contained() => v.push(Violation::Containment(k)),
                1 | 2 => {}
                m => v.push(Violation::BadMultiplicity(k, m)),
            }
        }
        let any = [CaseTag::A, CaseTag::B, CaseTag::C]
            .into_iter()
            .any(|t| self.case_holds(t));
        if !any {
            v.push(Violation::NoCase);
        } else if !self.case_holds(self.case_tag) {
            v.push(Violation::TagUnsatisfied(self.case_tag));
        }
        v
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidResponse(v))
        }
    }

    /// Gradient `𝔞′ + Σ_{j∈J} δ_j` and intercept `𝔞(0) + Σ_{j∈J} 𝔟_j` on the
    /// open cell with signature `sig`.
    pub fn cell_affine(&self, sig: &CellSignature) -> Result<(Vec<f64>, f64)> {
        if sig.len() != self.summands.len() {
            return Err(Error::SignatureMismatch {
                expected: self.summands.len(),
                got: sig.len(),
            });
        }
        let mut grad = self.affine_linear.clone();
        let mut intercept = self.affine_const;
        for (j, s) in self.summands.iter().enumerate() {
            if sig.is_inside(j) {
                grad.iter_mut().zip(&s.delta).for_each(|(g, d)| *g += d);
                intercept += s.jump;
            }
        }
        Ok((grad, intercept))
    }

    /// Rewrites summand `j` over the opposite half-space using
    /// `1_A = 1 − 1_{A′}` off the boundary: the affine part absorbs
    /// `δ_j·x + 𝔟_j` and the summand flips sign.
    pub fn switch_sides(&self, j: usize) -> Result<Self> {
        let len = self.summands.len();
        let s = self
            .summands
            .get(j)
            .ok_or(Error::IndexOutOfRange { index: j, len })?;
        let mut out = self.clone();
        out.affine_linear
            .iter_mut()
            .zip(&s.delta)
            .for_each(|(a, d)| *a += d);
        out.affine_const += s.jump;
        out.summands[j] = Summand {
            halfspace: s.halfspace.opposite(),
            delta: s.delta.iter().map(|d| -d).collect(),
            jump: -s.jump,
            multiplicity: s.multiplicity,
        };
        // switching can break or create case (c); keep the tag truthful
        if !out.case_holds(out.case_tag) {
            if let Some(t) = [CaseTag::C, CaseTag::B, CaseTag::A]
                .into_iter()
                .find(|t| out.case_holds(*t))
            {
                out.case_tag = t;
            } else {
                out.m0 = 1;
                out.case_tag = CaseTag::A;
            }
        }
        Ok(out)
    }
}

impl Field for GeneralizedResponse {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x)
    }

    fn cuts(&self) -> Vec<HalfSpace> {
        self.halfspaces()
    }
}
