use serde::{Deserialize, Serialize};

use super::{GeneralizedResponse, Summand, GRADIENT_CLEARANCE};
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, HalfSpace, UnitVector};
use crate::quadrature::Field;

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

/// Raw weights `(W¹, b¹, W², b²)` of a shallow ReLU network with `d` hidden
/// neurons; `w1` has one row per neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub d_in: usize,
    #[serde(rename = "W1")]
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    #[serde(rename = "W2")]
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl NetworkConfig {
    pub fn new(d_in: usize, w1: Vec<Vec<f64>>, b1: Vec<f64>, w2: Vec<f64>, b2: f64) -> Result<Self> {
        let cfg = Self { d_in, w1, b1, w2, b2 };
        cfg.check()?;
        Ok(cfg)
    }

    /// Network with zero hidden neurons: the constant `b2`.
    pub fn constant(d_in: usize, b2: f64) -> Self {
        Self {
            d_in,
            w1: Vec::new(),
            b1: Vec::new(),
            w2: Vec::new(),
            b2,
        }
    }

    pub fn check(&self) -> Result<()> {
        let d = self.w1.len();
        for got in [self.b1.len(), self.w2.len()] {
            if got != d {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        for row in &self.w1 {
            check_dim(self.d_in, row)?;
        }
        Ok(())
    }

    pub fn neurons(&self) -> usize {
        self.w1.len()
    }

    /// Length of the flat parameter vector, `(d_in + 2)·d + 1`.
    pub fn param_count(&self) -> usize {
        Self::param_count_for(self.neurons(), self.d_in)
    }

    pub fn param_count_for(d: usize, d_in: usize) -> usize {
        (d_in + 2) * d + 1
    }

    /// Pre-activation `W¹_j·x + b¹_j`.
    pub fn preactivation(&self, j: usize, x: &[f64]) -> f64 {
        dot(&self.w1[j], x) + self.b1[j]
    }

    /// `b² + Σ_j W²_j (W¹_j·x + b¹_j)⁺`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.d_in, x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.b2
            + (0..self.neurons())
                .map(|j| self.w2[j] * relu(self.preactivation(j, x)))
                .sum::<f64>()
    }

    /// Flat θ: `W¹` row-major, then `b¹`, `W²`, `b²`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.param_count());
        self.w1.iter().for_each(|r| theta.extend_from_slice(r));
        theta.extend_from_slice(&self.b1);
        theta.extend_from_slice(&self.w2);
        theta.push(self.b2);
        theta
    }

    pub fn from_flat(theta: &[f64], d: usize, d_in: usize) -> Result<Self> {
        let expected = Self::param_count_for(d, d_in);
        if theta.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: theta.len(),
            });
        }
        let (w1, rest) = theta.split_at(d * d_in);
        let (b1, rest) = rest.split_at(d);
        let (w2, rest) = rest.split_at(d);
        Ok(Self {
            d_in,
            w1: w1.chunks(d_in.max(1)).take(d).map(<[f64]>::to_vec).collect(),
            b1: b1.to_vec(),
            w2: w2.to_vec(),
            b2: rest[0],
        })
    }

    /// Euclidean norm of the flat parameter vector.
    pub fn param_norm(&self) -> f64 {
        norm(&self.to_flat())
    }

    /// Geometric reparametrization. Degenerate neurons (`W¹_j = 0`) become
    /// zero-kink neurons with normal `e₁` and offset 0; their constant
    /// contribution `W²_j (b¹_j)⁺` moves into the bias.
    pub fn to_effective(&self) -> EffectiveTuple {
        let d = self.neurons();
        let mut t = EffectiveTuple {
            d_in: self.d_in,
            normals: Vec::with_capacity(d),
            offsets: Vec::with_capacity(d),
            kinks: Vec::with_capacity(d),
            bias: self.b2,
        };
        for j in 0..d {
            let len = norm(&self.w1[j]);
            if len == 0.0 {
                t.normals.push(UnitVector::axis(self.d_in, 0));
                t.offsets.push(0.0);
                t.kinks.push(0.0);
                t.bias += self.w2[j] * relu(self.b1[j]);
            } else {
                let n = self.w1[j].iter().map(|w| w / len).collect();
                t.normals.push(UnitVector::normalize(n).expect("nonzero row"));
                t.offsets.push(-self.b1[j] / len);
                t.kinks.push(len * self.w2[j]);
            }
        }
        t
    }
}

/// `(normals, offsets, kinks, bias)`: the response
/// `bias + Σ_j kink_j (normal_j·x − offset_j)⁺`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveTuple {
    pub d_in: usize,
    pub normals: Vec<UnitVector>,
    pub offsets: Vec<f64>,
    pub kinks: Vec<f64>,
    pub bias: f64,
}

impl EffectiveTuple {
    pub fn new(
        d_in: usize,
        normals: Vec<UnitVector>,
        offsets: Vec<f64>,
        kinks: Vec<f64>,
        bias: f64,
    ) -> Result<Self> {
        let t = Self {
            d_in,
            normals,
            offsets,
            kinks,
            bias,
        };
        t.check()?;
        Ok(t)
    }

    pub fn constant(d_in: usize, bias: f64) -> Self {
        Self {
            d_in,
            normals: Vec::new(),
            offsets: Vec::new(),
            kinks: Vec::new(),
            bias,
        }
    }

    pub fn check(&self) -> Result<()> {
        let d = self.normals.len();
        for got in [self.offsets.len(), self.kinks.len()] {
            if got != d {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        for n in &self.normals {
            check_dim(self.d_in, n)?;
        }
        Ok(())
    }

    pub fn neurons(&self) -> usize {
        self.normals.len()
    }

    /// Domain of activity `A_j = {normal_j·x > offset_j}`.
    pub fn activity(&self, j: usize) -> HalfSpace {
        HalfSpace::new(self.normals[j].clone(), self.offsets[j])
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.d_in, x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.bias
            + (0..self.neurons())
                .map(|j| self.kinks[j] * relu(dot(&self.normals[j], x) - self.offsets[j]))
                .sum::<f64>()
    }

    /// Weights `w¹ = normal, b¹ = −offset, w² = kink, b² = bias`.
    pub fn to_network(&self) -> NetworkConfig {
        NetworkConfig {
            d_in: self.d_in,
            w1: self.normals.iter().map(|n| n.to_vec()).collect(),
            b1: self.offsets.iter().map(|o| -o).collect(),
            w2: self.kinks.clone(),
            b2: self.bias,
        }
    }

    /// `Σ_{j : x ∈ A_j} kink_j normal_j`, defined off the breaklines.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.d_in, x)?;
        let mut g = vec![0.0; self.d_in];
        for j in 0..self.neurons() {
            if self.kinks[j] == 0.0 {
                continue;
            }
            let s = dot(&self.normals[j], x) - self.offsets[j];
            if s.abs() <= GRADIENT_CLEARANCE {
                return Err(Error::OnBreakline {
                    neuron: j,
                    distance: s.abs(),
                });
            }
            if s > 0.0 {
                g.iter_mut()
                    .zip(self.normals[j].iter())
                    .for_each(|(gi, ni)| *gi += self.kinks[j] * ni);
            }
        }
        Ok(g)
    }

    /// Breaklines of the neurons with nonzero kink.
    pub fn breaklines(&self) -> Vec<HalfSpace> {
        (0..self.neurons())
            .filter(|&j| self.kinks[j] != 0.0)
            .map(|j| self.activity(j))
            .collect()
    }

    fn shared_breakline(&self) -> Option<(usize, usize)> {
        let active: Vec<usize> = (0..self.neurons()).filter(|&j| self.kinks[j] != 0.0).collect();
        for (a, &i) in active.iter().enumerate() {
            for &j in &active[a + 1..] {
                if self
                    .activity(i)
                    .boundary_relation(&self.activity(j), crate::geometry::TOL_BOUNDARY)
                    .is_some()
                {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Embeds the tuple as a representable generalized response: neuron `j`
    /// becomes the summand `1_{A_j}(kink_j normal_j·x − kink_j offset_j)`.
    /// Zero-kink neurons contribute nothing and are skipped.
    pub fn to_generalized(&self) -> Result<GeneralizedResponse> {
        if let Some((i, j)) = self.shared_breakline() {
            return Err(Error::SharedBreakline(i, j));
        }
        Ok(self.embed())
    }

    /// Like [`Self::to_generalized`] but merges neurons that share a
    /// breakline via [`GeneralizedResponse::canonical_reduce`].
    pub fn to_generalized_merged(&self) -> Result<GeneralizedResponse> {
        Ok(self.embed().canonical_reduce()?.0)
    }

    fn embed(&self) -> GeneralizedResponse {
        let summands = (0..self.neurons())
            .filter(|&j| self.kinks[j] != 0.0)
            .map(|j| Summand {
                halfspace: self.activity(j),
                delta: self.normals[j].iter().map(|n| self.kinks[j] * n).collect(),
                jump: -self.kinks[j] * self.offsets[j],
                multiplicity: 1,
            })
            .collect();
        GeneralizedResponse::constant(self.d_in, self.bias).with_summands(summands)
    }
}

impl Field for NetworkConfig {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x)
    }

    fn cuts(&self) -> Vec<HalfSpace> {
        self.to_effective().breaklines()
    }
}

impl Field for EffectiveTuple {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x)
    }

    fn cuts(&self) -> Vec<HalfSpace> {
        self.breaklines()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple1(n: f64, o: f64, k: f64, b: f64) -> EffectiveTuple {
        EffectiveTuple::new(1, vec![UnitVector::normalize(vec![n]).unwrap()], vec![o], vec![k], b)
            .unwrap()
    }

    #[test]
    fn eval_network_examples() {
        let cfg = NetworkConfig::new(1, vec![vec![2.0]], vec![-2.0], vec![3.0], 1.0).unwrap();
        assert_eq!(cfg.eval(&[2.0]).unwrap(), 7.0);
        assert_eq!(cfg.eval(&[0.0]).unwrap(), 1.0);
        let deg = NetworkConfig::new(1, vec![vec![0.0]], vec![5.0], vec![2.0], 0.0).unwrap();
        assert_eq!(deg.eval(&[-3.0]).unwrap(), 10.0);
        assert!(matches!(cfg.eval(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn to_effective_examples() {
        let cfg = NetworkConfig::new(1, vec![vec![2.0]], vec![-2.0], vec![3.0], 1.0).unwrap();
        let t = cfg.to_effective();
        assert_eq!(t.normals[0].as_slice(), &[1.0]);
        assert_eq!((t.offsets[0], t.kinks[0], t.bias), (1.0, 6.0, 1.0));

        let deg = NetworkConfig::new(1, vec![vec![0.0]], vec![5.0], vec![2.0], 0.0).unwrap();
        let t = deg.to_effective();
        assert_eq!((t.kinks[0], t.bias, t.offsets[0]), (0.0, 10.0, 0.0));
        assert_eq!(t.normals[0].as_slice(), &[1.0]);
    }

    #[test]
    fn eval_tuple_examples() {
        assert_eq!(tuple1(1.0, 1.0, 6.0, 1.0).eval(&[2.0]).unwrap(), 7.0);
        assert_eq!(EffectiveTuple::constant(3, 4.2).eval(&[1.0, 2.0, 3.0]).unwrap(), 4.2);
        let abs = EffectiveTuple::new(
            2,
            vec![UnitVector::axis(2, 0), UnitVector::axis(2, 0).neg()],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            0.0,
        )
        .unwrap();
        assert!((abs.eval(&[0.7, 9.0]).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn from_effective_examples() {
        let cfg = tuple1(1.0, 1.0, 6.0, 1.0).to_network();
        assert_eq!(cfg.w1, vec![vec![1.0]]);
        assert_eq!((cfg.b1[0], cfg.w2[0], cfg.b2), (-1.0, 6.0, 1.0));
        let c = EffectiveTuple::constant(2, 3.5).to_network();
        assert_eq!((c.neurons(), c.b2), (0, 3.5));
    }

    #[test]
    fn flat_layout() {
        let cfg = NetworkConfig::new(
            2,
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![5.0, 6.0],
            vec![7.0, 8.0],
            9.0,
        )
        .unwrap();
        let theta = cfg.to_flat();
        assert_eq!(theta, (1..=9).map(f64::from).collect::<Vec<_>>());
        assert_eq!(NetworkConfig::from_flat(&theta, 2, 2).unwrap(), cfg);
        assert_eq!(NetworkConfig::from_flat(&[2.5], 0, 3).unwrap().b2, 2.5);
    }

    #[test]
    fn gradient_examples() {
        let abs = EffectiveTuple::new(
            1,
            vec![UnitVector::axis(1, 0), UnitVector::axis(1, 0).neg()],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            0.0,
        )
        .unwrap();
        assert_eq!(abs.gradient(&[0.5]).unwrap(), vec![1.0]);
        assert_eq!(abs.gradient(&[-0.5]).unwrap(), vec![-1.0]);
        assert!(matches!(abs.gradient(&[1e-7]), Err(Error::OnBreakline { .. })));
        assert_eq!(EffectiveTuple::constant(2, 1.0).gradient(&[0.3, 0.1]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn to_generalized_example() {
        let r = tuple1(1.0, 0.0, 2.0, 3.0).to_generalized().unwrap();
        assert_eq!(r.summands.len(), 1);
        let s = &r.summands[0];
        assert_eq!((s.delta.as_slice(), s.jump, s.multiplicity), (&[2.0][..], -0.0, 1));
        assert_eq!(r.affine_const, 3.0);
        assert!(r.validate().is_empty());
        assert_eq!(r.eval(&[1.5]).unwrap(), 6.0);
    }

    #[test]
    fn shared_breakline_detected() {
        let abs = EffectiveTuple::new(
            1,
            vec![UnitVector::axis(1, 0), UnitVector::axis(1, 0).neg()],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            0.0,
        )
        .unwrap();
        assert!(matches!(abs.to_generalized(), Err(Error::SharedBreakline(0, 1))));
        let merged = abs.to_generalized_merged().unwrap();
        for x in [-0.7, -0.2, 0.3, 0.9] {
            assert!((merged.eval(&[x]).unwrap() - x.abs()).abs() < 1e-15);
        }
    }
}
