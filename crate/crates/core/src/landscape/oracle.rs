use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{target_mean, LossSpec};
use crate::error::{Error, Result};
use crate::geometry::UnitVector;
use crate::quadrature::{error_functional, Measure, VolumeRule};
use crate::response::EffectiveTuple;

/// Random restarts per added neuron, on top of the warm start.
const RESTARTS: usize = 8;
/// Step size below which a coordinate is considered resolved.
const STEP_TOL: f64 = 1e-9;
const DEFAULT_SEED: u64 = 0x0_5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub err: f64,
    pub tuple: EffectiveTuple,
    /// Best error for `0, 1, …, d` neurons.
    pub level_errs: Vec<f64>,
    pub evaluations: usize,
}

/// Coordinates of an effective tuple. For `d_in = 1` the normal sign is
/// fixed per start; for `d_in = 2` the normal is `(cos φ, sin φ)`.
#[derive(Debug, Clone)]
struct Coords {
    d_in: usize,
    signs: Vec<f64>,
    /// Per neuron `[φ,] offset, kink`, then the bias.
    values: Vec<f64>,
}

impl Coords {
    fn per_neuron(&self) -> usize {
        if self.d_in == 1 { 2 } else { 3 }
    }

    fn neurons(&self) -> usize {
        (self.values.len() - 1) / self.per_neuron()
    }

    fn tuple(&self) -> EffectiveTuple {
        let k = self.per_neuron();
        let mut t = EffectiveTuple::constant(self.d_in, *self.values.last().expect("bias"));
        for j in 0..self.neurons() {
            let v = &self.values[j * k..(j + 1) * k];
            let (normal, rest) = if self.d_in == 1 {
                (UnitVector::axis(1, 0), v)
            } else {
                (
                    UnitVector::normalize(vec![v[0].cos(), v[0].sin()]).expect("unit circle"),
                    &v[1..],
                )
            };
            t.normals.push(if self.d_in == 1 && self.signs[j] < 0.0 { normal.neg() } else { normal });
            t.offsets.push(rest[0]);
            t.kinks.push(rest[1]);
        }
        t
    }

    fn push_neuron(&mut self, sign: f64, angle: f64, offset: f64, kink: f64) {
        let bias = self.values.pop().expect("bias");
        if self.d_in == 2 {
            self.values.push(angle);
        }
        self.values.extend([offset, kink, bias]);
        self.signs.push(sign);
    }

    fn initial_steps(&self, diam: f64) -> Vec<f64> {
        let k = self.per_neuron();
        let mut s = Vec::with_capacity(self.values.len());
        for _ in 0..self.neurons() {
            if self.d_in == 2 {
                s.push(0.5);
            }
            s.extend([0.25 * diam, 0.5]);
        }
        s.push(0.5);
        debug_assert_eq!(s.len(), self.neurons() * k + 1);
        s
    }
}

struct Search<'a> {
    loss: &'a LossSpec,
    m: &'a Measure,
    rule: VolumeRule,
    evaluations: usize,
}

impl Search<'_> {
    fn err(&mut self, c: &Coords) -> Result<f64> {
        self.evaluations += 1;
        let e = error_functional(&c.tuple(), self.loss, self.m, self.rule)?;
        Ok(if e.is_finite() { e } else { f64::INFINITY })
    }

    /// Compass search with per-coordinate steps: expand on success, halve
    /// on failure. Returns the final error and whether every step fell
    /// below tolerance within `cap` evaluations.
    fn compass(&mut self, c: &mut Coords, cap: usize) -> Result<(f64, bool)> {
        let mut steps = c.initial_steps(self.m.domain.diameter());
        let mut best = self.err(c)?;
        let mut used = 1;
        while used < cap {
            if steps.iter().all(|s| *s < STEP_TOL) {
                return Ok((best, true));
            }
            for i in 0..c.values.len() {
                if steps[i] < STEP_TOL {
                    continue;
                }
                let orig = c.values[i];
                let mut moved = false;
                for dir in [1.0, -1.0] {
                    c.values[i] = orig + dir * steps[i];
                    let e = self.err(c)?;
                    used += 1;
                    if e < best {
                        best = e;
                        moved = true;
                        break;
                    }
                }
                if moved {
                    steps[i] *= 2.0;
                } else {
                    c.values[i] = orig;
                    steps[i] *= 0.5;
                }
            }
        }
        Ok((best, steps.iter().all(|s| *s < STEP_TOL)))
    }
}

/// Best error found with `d` neurons, searching each neuron count
/// `0, 1, …, d` in turn with `budget` error evaluations per count.
pub fn oracle_min(d: usize, loss: &LossSpec, m: &Measure, budget: usize) -> Result<(f64, EffectiveTuple)> {
    let r = oracle_search(d, loss, m, budget, DEFAULT_SEED)?;
    Ok((r.err, r.tuple))
}

/// Each neuron count starts once from the previous optimum extended by a
/// zero-kink neuron, so the result is non-increasing in `d` for a fixed
/// seed and budget, plus [`RESTARTS`] random starts.
pub fn oracle_search(d: usize, loss: &LossSpec, m: &Measure, budget: usize, seed: u64) -> Result<OracleResult> {
    let d_in = m.dim();
    if d > 2 || d_in > 2 || d_in == 0 {
        return Err(Error::OracleTooLarge { d, d_in });
    }
    let mut search = Search { loss, m, rule: VolumeRule::for_piecewise(d_in), evaluations: 0 };
    let bias = target_mean(loss, m)?;

    let mut best = Coords { d_in, signs: Vec::new(), values: vec![bias] };
    let (e0, ok) = search.compass(&mut best, budget)?;
    if !ok {
        return Err(Error::BudgetExceeded(budget));
    }
    let mut best_err = e0;
    let mut level_errs = vec![e0];

    for level in 1..=d {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (level as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut starts = Vec::with_capacity(RESTARTS + 1);
        let mut warm = best.clone();
        let (sign, angle, offset) = random_neuron(d_in, m, None, &mut rng);
        warm.push_neuron(sign, angle, offset, 0.0);
        starts.push(warm);
        for r in 0..RESTARTS {
            let mut c = Coords { d_in, signs: Vec::new(), values: vec![bias] };
            for j in 0..level {
                // In one dimension the restarts cycle through the sign patterns.
                let pattern = (d_in == 1).then(|| if (r >> j) & 1 == 0 { 1.0 } else { -1.0 });
                let (sign, angle, offset) = random_neuron(d_in, m, pattern, &mut rng);
                let kink = rng.sample::<f64, _>(rand_distr::StandardNormal);
                c.push_neuron(sign, angle, offset, kink);
            }
            starts.push(c);
        }

        let cap = budget / starts.len();
        let mut any_converged = false;
        let mut level_best: Option<(f64, Coords)> = None;
        for mut c in starts {
            let (e, ok) = search.compass(&mut c, cap)?;
            any_converged |= ok;
            if level_best.as_ref().is_none_or(|(b, _)| e < *b) {
                level_best = Some((e, c));
            }
        }
        if !any_converged {
            return Err(Error::BudgetExceeded(budget));
        }
        let (e, c) = level_best.expect("at least one start");
        best_err = e;
        best = c;
        level_errs.push(e);
    }
    Ok(OracleResult { err: best_err, tuple: best.tuple(), level_errs, evaluations: search.evaluations })
}

/// `(sign, angle, offset)` with the breakline inside the domain.
fn random_neuron(d_in: usize, m: &Measure, sign: Option<f64>, rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    if d_in == 1 {
        let coin = rng.random::<bool>();
        let sign = sign.unwrap_or(if coin { 1.0 } else { -1.0 });
        let (lo, hi) = m.domain.projection_range(&[sign]);
        (sign, 0.0, rng.random_range(lo..=hi))
    } else {
        let angle = rng.random_range(-PI..PI);
        let (lo, hi) = m.domain.projection_range(&[angle.cos(), angle.sin()]);
        (1.0, angle, rng.random_range(lo..=hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxDomain;
    use crate::landscape::{lp_loss, Target};

    fn unit(d_in: usize) -> Measure {
        Measure::uniform(BoxDomain::cube(d_in, 1.0))
    }

    #[test]
    fn constant_level_matches_closed_form() {
        let loss = lp_loss(Target::Abs, 2.0).unwrap();
        let (e, t) = oracle_min(0, &loss, &unit(1), 2000).unwrap();
        assert!((e - 1.0 / 12.0).abs() < 1e-5);
        assert!((t.bias - 0.5).abs() < 1e-4);
    }

    #[test]
    fn abs_is_found_with_two_neurons() {
        let loss = lp_loss(Target::Abs, 2.0).unwrap();
        let (e, _) = oracle_min(2, &loss, &unit(1), 20_000).unwrap();
        assert!(e <= 1e-5, "{e}");
    }

    #[test]
    fn quadratic_one_neuron_improves() {
        let loss = lp_loss(Target::Quadratic, 2.0).unwrap();
        let r = oracle_search(1, &loss, &unit(1), 20_000, 1).unwrap();
        assert!((r.level_errs[0] - 4.0 / 45.0).abs() < 1e-6);
        assert!(r.level_errs[1] <= r.level_errs[0]);
    }

    #[test]
    fn guards() {
        let loss = lp_loss(Target::Abs, 2.0).unwrap();
        assert!(matches!(oracle_min(3, &loss, &unit(1), 100), Err(Error::OracleTooLarge { .. })));
        assert!(matches!(oracle_min(1, &loss, &unit(3), 100), Err(Error::OracleTooLarge { .. })));
        assert!(matches!(oracle_min(2, &loss, &unit(1), 20), Err(Error::BudgetExceeded(20))));
    }
}
