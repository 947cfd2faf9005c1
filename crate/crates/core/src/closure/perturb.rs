use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DependenceVector;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, BoxDomain};
use crate::response::{EffectiveTuple, GeneralizedResponse, NetworkConfig};

/// Plus- and minus-side affine pieces of one summand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPart {
    pub delta_plus: Vec<f64>,
    pub delta_minus: Vec<f64>,
    pub b_plus: f64,
    pub b_minus: f64,
}

impl SplitPart {
    pub fn plus(&self, x: &[f64]) -> f64 {
        dot(&self.delta_plus, x) + self.b_plus
    }

    pub fn minus(&self, x: &[f64]) -> f64 {
        dot(&self.delta_minus, x) + self.b_minus
    }
}

/// `R(x) = 𝔟 + Σ_j [1_{A_j}(δ_j⁺·x + 𝔟_j⁺) + 1_{A_jᶜ}(δ_j⁻·x + 𝔟_j⁻)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitParts {
    pub bias: f64,
    pub parts: Vec<SplitPart>,
}

impl SplitParts {
    /// Right-hand side of the split identity.
    pub fn reconstruct(&self, r: &GeneralizedResponse, x: &[f64]) -> f64 {
        self.bias
            + r.summands
                .iter()
                .zip(&self.parts)
                .map(|(s, p)| if s.halfspace.contains(x) { p.plus(x) } else { p.minus(x) })
                .sum::<f64>()
    }
}

const RECONSTRUCTION_TOL: f64 = 1e-10;
const RECONSTRUCTION_POINTS: usize = 100;

fn require_full_support(r: &GeneralizedResponse, dep: &DependenceVector) -> Result<()> {
    match (0..r.summands.len()).find(|j| !dep.contains(*j)) {
        Some(j) => Err(Error::NotInSupport(j)),
        None => Ok(()),
    }
}

/// Canonical split: each plus side carries `(δ_j, 𝔟_j)`, the minus sides
/// are zero, `𝔟 = 𝔞(0)`, and the linear part `𝔞′` of the affine term sits
/// on the minus side of the first summand (`δ⁻ = 𝔞′`, `δ⁺ = δ + 𝔞′`).
/// The identity is checked at seeded points away from the boundaries.
pub fn make_splits(r: &GeneralizedResponse, dep: &DependenceVector) -> Result<SplitParts> {
    require_full_support(r, dep)?;
    let d = r.d_in();
    let mut parts: Vec<SplitPart> = r
        .summands
        .iter()
        .map(|s| SplitPart {
            delta_plus: s.delta.clone(),
            delta_minus: vec![0.0; d],
            b_plus: s.jump,
            b_minus: 0.0,
        })
        .collect();
    if let Some(first) = parts.first_mut() {
        first.delta_minus = r.affine_linear.clone();
        first.delta_plus.iter_mut().zip(&r.affine_linear).for_each(|(p, a)| *p += a);
    }
    let splits = SplitParts { bias: r.affine_const, parts };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5117);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < RECONSTRUCTION_POINTS {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        if r.summands.iter().any(|s| s.halfspace.signed_distance(&x).abs() < 1e-6) {
            continue;
        }
        let want = r.eval_unchecked(&x);
        let dev = (splits.reconstruct(r, &x) - want).abs() / (1.0 + want.abs());
        worst = worst.max(dev);
        checked += 1;
    }
    if worst > RECONSTRUCTION_TOL {
        return Err(Error::ReconstructionFailed(worst));
    }
    Ok(splits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbSign {
    Plus,
    Minus,
}

impl PerturbSign {
    fn factor(self) -> f64 {
        match self {
            PerturbSign::Plus => 1.0,
            PerturbSign::Minus => -1.0,
        }
    }
}

/// Smallest admissible κ: beyond it every hinge weight `±δ_j^± ± κα_j𝔫_j`
/// is dominated by its `κα_j𝔫_j` term.
pub fn kappa_min(dep: &DependenceVector, splits: &SplitParts, domain: &BoxDomain) -> f64 {
    let diam = domain.diameter();
    dep.support
        .iter()
        .zip(&dep.alphas)
        .map(|(&j, a)| {
            let p = &splits.parts[j];
            let plus = norm(&p.delta_plus) + p.b_plus.abs() / diam;
            let minus = norm(&p.delta_minus) + p.b_minus.abs() / diam;
            plus.max(minus) / a
        })
        .fold(0.0, f64::max)
}

/// The network `R^{±κ}`: every summand `j` becomes the hinge pair
/// `(δ⁺·x + 𝔟⁺ + κα(𝔫·x − o))⁺ − (−δ⁻·x − 𝔟⁻ − κα(𝔫·x − o))⁺`
/// (with `κ → −κ` and the units negated for [`PerturbSign::Minus`]), and the
/// bias is `𝔟 ± Σ κα_j o_j`. It agrees with `R` outside slabs of width
/// `O(1/κ)` around the breaklines.
pub fn kappa_perturb(
    r: &GeneralizedResponse,
    dep: &DependenceVector,
    splits: &SplitParts,
    domain: &BoxDomain,
    kappa: f64,
    sign: PerturbSign,
) -> Result<EffectiveTuple> {
    require_full_support(r, dep)?;
    let min = kappa_min(dep, splits, domain);
    if !(kappa > min) || !kappa.is_finite() {
        return Err(Error::KappaTooSmall { kappa, min });
    }
    let s = sign.factor();
    let d_in = r.d_in();
    let mut net = NetworkConfig::constant(d_in, splits.bias);
    for (&j, &alpha) in dep.support.iter().zip(&dep.alphas) {
        let h = &r.summands[j].halfspace;
        let p = &splits.parts[j];
        let ka = kappa * alpha;
        let n = h.normal.as_slice();
        // Unit active on A_j: s·(δ⁺·x + 𝔟⁺) + κα(𝔫·x − o), outer weight s.
        net.w1.push(p.delta_plus.iter().zip(n).map(|(dp, ni)| s * dp + ka * ni).collect());
        net.b1.push(s * p.b_plus - ka * h.offset);
        net.w2.push(s);
        // Unit active on A_jᶜ: −s·(δ⁻·x + 𝔟⁻) − κα(𝔫·x − o), outer weight −s.
        net.w1.push(p.delta_minus.iter().zip(n).map(|(dm, ni)| -s * dm - ka * ni).collect());
        net.b1.push(-s * p.b_minus + ka * h.offset);
        net.w2.push(-s);
        net.b2 += s * ka * h.offset;
    }
    Ok(net.to_effective())
}
