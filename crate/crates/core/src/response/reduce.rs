use super::generalized::Violation;
use super::{CaseTag, GeneralizedResponse, Summand};
use crate::error::{Error, Result};
use crate::geometry::TOL_BOUNDARY;

/// Outcome of [`GeneralizedResponse::canonical_reduce`].
///
/// `reduced_dimension` is `m0 + Σ m_k` of the reduced representation, an
/// upper bound on the minimal dimension over all representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResponseClass {
    pub reduced_dimension: usize,
    pub representable: bool,
}

impl ResponseClass {
    /// Strict at `d`: dimension at most `d − 1`, or discontinuous.
    pub fn strict_at(&self, d: usize) -> bool {
        !self.representable || self.reduced_dimension < d
    }
}

impl GeneralizedResponse {
    /// Merges summands over a common boundary, drops vanishing summands,
    /// assigns multiplicity 1 wherever the boundary-containment condition
    /// holds, and picks the cheapest admissible case.
    ///
    /// Shared boundaries in the input are repaired; every other violation is
    /// an error.
    pub fn canonical_reduce(&self) -> Result<(GeneralizedResponse, ResponseClass)> {
        let fatal: Vec<Violation> = self
            .validate()
            .into_iter()
            .filter(|v| {
                !matches!(
                    v,
                    Violation::SharedBoundary(..) | Violation::NoCase | Violation::TagUnsatisfied(_)
                )
            })
            .collect();
        if !fatal.is_empty() {
            return Err(Error::InvalidResponse(fatal));
        }

        let mut out = GeneralizedResponse::constant(self.d_in(), self.affine_const);
        out.affine_linear = self.affine_linear.clone();
        let mut merged: Vec<Summand> = Vec::with_capacity(self.summands.len());
        for s in &self.summands {
            let hit = merged.iter().enumerate().find_map(|(i, m)| {
                m.halfspace
                    .boundary_relation(&s.halfspace, TOL_BOUNDARY)
                    .map(|same| (i, same))
            });
            match hit {
                None => merged.push(s.clone()),
                Some((i, true)) => {
                    let m = &mut merged[i];
                    m.delta.iter_mut().zip(&s.delta).for_each(|(a, b)| *a += b);
                    m.jump += s.jump;
                }
                Some((i, false)) => {
                    // 1_{A′} g = g − 1_{A} g off the common boundary
                    out.affine_linear
                        .iter_mut()
                        .zip(&s.delta)
                        .for_each(|(a, b)| *a += b);
                    out.affine_const += s.jump;
                    let m = &mut merged[i];
                    m.delta.iter_mut().zip(&s.delta).for_each(|(a, b)| *a -= b);
                    m.jump -= s.jump;
                }
            }
        }
        out.summands = merged
            .into_iter()
            .filter(|s| !s.is_zero_summand())
            .map(|mut s| {
                s.multiplicity = if s.boundary_contained() { 1 } else { 2 };
                s
            })
            .collect();
        for a in out.affine_linear.iter_mut() {
            if a.abs() <= super::TOL_CONTAINMENT {
                *a = 0.0;
            }
        }

        // A summand whose δ cancels the affine slope can be switched to reach case (c).
        if !out.is_affine_constant() && !out.double_normals_dependent() {
            let slope = out.affine_linear.clone();
            let scale = 1.0 + crate::geometry::norm(&slope);
            if let Some(j) = out.summands.iter().position(|s| {
                s.delta
                    .iter()
                    .zip(&slope)
                    .all(|(d, a)| (d + a).abs() <= super::TOL_CONTAINMENT * scale)
            }) {
                out = out.switch_sides(j)?;
                out.affine_linear.iter_mut().for_each(|a| {
                    if a.abs() <= super::TOL_CONTAINMENT * scale {
                        *a = 0.0;
                    }
                });
            }
        }

        let (m0, tag) = if out.is_affine_constant() {
            (0, CaseTag::C)
        } else if out.double_normals_dependent() {
            (0, CaseTag::B)
        } else {
            (1, CaseTag::A)
        };
        out.m0 = m0;
        out.case_tag = tag;
        let class = ResponseClass {
            reduced_dimension: out.dimension_budget(),
            representable: out.summands.iter().all(|s| s.multiplicity == 1),
        };
        Ok((out, class))
    }
}

impl Summand {
    fn is_zero_summand(&self) -> bool {
        self.delta.iter().all(|d| d.abs() <= 1e-14) && self.jump.abs() <= 1e-14
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitVector;
    use crate::response::generalized::tests::{f4, hs, step};
    use crate::response::EffectiveTuple;

    #[test]
    fn step_is_discontinuous_dimension_two() {
        let (r, c) = step().canonical_reduce().unwrap();
        assert_eq!(c.reduced_dimension, 2);
        assert!(!c.representable);
        assert_eq!(r.case_tag, CaseTag::C);
        assert!(c.strict_at(2) && c.strict_at(3));
    }

    #[test]
    fn step_has_no_single_continuous_summand() {
        // Any multiplicity-1 summand is continuous, so it cannot reproduce
        // the jump of the step at the origin.
        let r = step();
        let jump = r.eval(&[1e-9]).unwrap() - r.eval(&[-1e-9]).unwrap();
        assert!((jump - 1.0).abs() < 1e-12);
        for (d, b) in [(1.0, 0.0), (-2.0, 0.0), (0.5, 0.0)] {
            let s = Summand {
                halfspace: hs(vec![1.0], 0.0),
                delta: vec![d],
                jump: b,
                multiplicity: 1,
            };
            assert!(s.boundary_contained());
            assert!(s.value(&[0.0]).abs() < 1e-15);
        }
    }

    #[test]
    fn three_neuron_tuple() {
        let t = EffectiveTuple::new(
            2,
            vec![
                UnitVector::normalize(vec![1.0, 0.0]).unwrap(),
                UnitVector::normalize(vec![0.0, 1.0]).unwrap(),
                UnitVector::normalize(vec![1.0, 1.0]).unwrap(),
            ],
            vec![0.1, -0.2, 0.3],
            vec![1.0, -2.0, 0.5],
            0.7,
        )
        .unwrap();
        let (_, c) = t.to_generalized().unwrap().canonical_reduce().unwrap();
        assert_eq!(c.reduced_dimension, 3);
        assert!(c.representable);
        assert!(!c.strict_at(4) || c.reduced_dimension < 4);
    }

    #[test]
    fn multiplicity_downgraded() {
        let n = UnitVector::normalize(vec![1.0, 0.0]).unwrap();
        let (delta, o) = (1.5, 0.2);
        let mut r = GeneralizedResponse::constant(2, 0.0);
        r.summands.push(Summand {
            halfspace: crate::geometry::HalfSpace::new(n.clone(), o),
            delta: n.iter().map(|x| delta * x).collect(),
            jump: -delta * o,
            multiplicity: 2,
        });
        let (red, c) = r.canonical_reduce().unwrap();
        assert_eq!(red.summands[0].multiplicity, 1);
        assert_eq!(c.reduced_dimension, 1);
    }

    #[test]
    fn f4_stays_two_double_summands() {
        let (r, c) = f4().canonical_reduce().unwrap();
        assert_eq!(c.reduced_dimension, 4);
        assert!(!c.representable);
        assert_eq!(r.m0, 0);
    }

    #[test]
    fn abs_value_needs_m0() {
        let t = EffectiveTuple::new(
            1,
            vec![UnitVector::axis(1, 0), UnitVector::axis(1, 0).neg()],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            0.0,
        )
        .unwrap();
        let (r, c) = t.to_generalized_merged().unwrap().canonical_reduce().unwrap();
        assert_eq!(c.reduced_dimension, 2);
        assert!(c.representable);
        assert!(r.validate().is_empty());
    }

    #[test]
    fn slope_absorbed_by_switch() {
        // x + 1_{x>0}(−x) equals 1_{x<0} x: constant affine part after switching
        let mut r = GeneralizedResponse::constant(1, 0.0);
        r.affine_linear = vec![1.0];
        r.m0 = 1;
        r.case_tag = CaseTag::A;
        r.summands.push(Summand {
            halfspace: hs(vec![1.0], 0.0),
            delta: vec![-1.0],
            jump: 0.0,
            multiplicity: 1,
        });
        let (red, c) = r.canonical_reduce().unwrap();
        assert_eq!(c.reduced_dimension, 1);
        assert_eq!(red.case_tag, CaseTag::C);
        for x in [-0.8, -0.1, 0.4] {
            assert!((red.eval(&[x]).unwrap() - r.eval(&[x]).unwrap()).abs() < 1e-15);
        }
    }
}
