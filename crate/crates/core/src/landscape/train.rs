use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::LossSpec;
use crate::error::{Error, Result};
use crate::geometry::{norm, HalfSpace, UnitVector};
use crate::par;
use crate::quadrature::{integrate_nodes, volume_nodes, Measure, Nodes, Piecewise, VolumeRule};
use crate::response::{EffectiveTuple, NetworkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub seed: u64,
    /// Standard deviation of the initial kinks.
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Start from `θ = 0` instead of the random geometric initialization.
    #[serde(default)]
    pub zero: bool,
}

fn default_scale() -> f64 {
    1.0
}

impl Default for InitSpec {
    fn default() -> Self {
        Self { seed: 0, scale: 1.0, zero: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub d: usize,
    pub step_size: f64,
    pub steps: usize,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub gradient: GradientMode,
    #[serde(default = "default_rule")]
    pub quadrature: VolumeRule,
    /// A tuple snapshot is stored every this many steps (0 disables).
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

fn default_rule() -> VolumeRule {
    VolumeRule::TensorGauss { points: crate::quadrature::DEFAULT_CELL_ORDER }
}

fn default_snapshot_every() -> usize {
    1000
}

impl TrainConfig {
    pub fn new(d: usize, step_size: f64, steps: usize, seed: u64) -> Self {
        Self {
            d,
            step_size,
            steps,
            init: InitSpec { seed, ..InitSpec::default() },
            gradient: GradientMode::Analytic,
            quadrature: default_rule(),
            snapshot_every: default_snapshot_every(),
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::InvalidArgument(format!("step_size must be positive, got {}", self.step_size)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if !(self.init.scale >= 0.0) {
            return Err(Error::InvalidArgument("init.scale must be non-negative".into()));
        }
        self.quadrature.check()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub err: f64,
    pub param_norm: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    /// One record per step, taken before the update.
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<(usize, EffectiveTuple)>,
    pub best_step: usize,
    pub best_err: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }
}

/// `∫ f dμ` for the loss target, or 0 when the loss carries none.
pub fn target_mean(loss: &LossSpec, m: &Measure) -> Result<f64> {
    let Some(t) = loss.target() else {
        return Ok(0.0);
    };
    let field = Piecewise { f: |x: &[f64]| t.eval(x), cuts: t.cuts(m.dim()) };
    let nodes = volume_nodes(m, VolumeRule::for_piecewise(m.dim()), &field.cuts)?;
    integrate_nodes(&field, &nodes)
}

/// Random geometric initialization. Normals come in antithetic pairs
/// `(n, −n)`; each one is still marginally uniform on the sphere.
pub fn initial_tuple(d: usize, init: &InitSpec, loss: &LossSpec, m: &Measure) -> Result<EffectiveTuple> {
    let d_in = m.dim();
    let bias = target_mean(loss, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(init.seed);
    let mut t = EffectiveTuple::constant(d_in, bias);
    for j in 0..d {
        let n = if j % 2 == 1 {
            t.normals[j - 1].neg()
        } else {
            random_direction(d_in, &mut rng)
        };
        let (lo, hi) = m.domain.projection_range(&n);
        t.offsets.push(rng.random_range(lo..=hi));
        t.normals.push(n);
        let z: f64 = StandardNormal.sample(&mut rng);
        t.kinks.push(init.scale * z);
    }
    Ok(t)
}

pub(crate) fn random_direction<R: Rng + ?Sized>(d_in: usize, rng: &mut R) -> UnitVector {
    loop {
        let v: Vec<f64> = (0..d_in).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = UnitVector::normalize(v) {
            return u;
        }
    }
}

fn network_cuts(net: &NetworkConfig, loss: &LossSpec, d_in: usize) -> Vec<HalfSpace> {
    let mut cuts: Vec<HalfSpace> = (0..net.neurons())
        .filter_map(|j| HalfSpace::from_affine(&net.w1[j], net.b1[j]))
        .collect();
    cuts.extend(loss.cuts(d_in));
    cuts
}

fn nodes_for(net: &NetworkConfig, loss: &LossSpec, m: &Measure, rule: VolumeRule) -> Result<Nodes> {
    volume_nodes(m, rule, &network_cuts(net, loss, m.dim()))
}

/// `err(θ)` for the flat parameter vector of a `d`-neuron network.
pub fn error_at(theta: &[f64], d: usize, loss: &LossSpec, m: &Measure, rule: VolumeRule) -> Result<f64> {
    let net = NetworkConfig::from_flat(theta, d, m.dim())?;
    let nodes = nodes_for(&net, loss, m, rule)?;
    Ok(par::sum(nodes.len(), |i| {
        let x = nodes.point(i);
        nodes.weights[i] * loss.value(x, net.eval_unchecked(x))
    }))
}

/// `(err(θ), ∇_θ err(θ))`, differentiating under the integral. The ReLU
/// derivative at the kink is taken as 0.
pub fn error_and_gradient(
    theta: &[f64],
    d: usize,
    loss: &LossSpec,
    m: &Measure,
    rule: VolumeRule,
) -> Result<(f64, Vec<f64>)> {
    let d_in = m.dim();
    let net = NetworkConfig::from_flat(theta, d, d_in)?;
    let nodes = nodes_for(&net, loss, m, rule)?;
    let p = theta.len();
    // Component p carries the error itself.
    let mut acc = par::sum_vec(nodes.len(), p + 1, |i, out| {
        let x = nodes.point(i);
        let w = nodes.weights[i];
        let y = net.eval_unchecked(x);
        let g = w * loss.dy(x, y);
        for j in 0..d {
            let a = net.preactivation(j, x);
            if a > 0.0 {
                let s = g * net.w2[j];
                for (k, xk) in x.iter().enumerate() {
                    out[j * d_in + k] = s * xk;
                }
                out[d * d_in + j] = s;
                out[d * d_in + d + j] = g * a;
            }
        }
        out[p - 1] = g;
        out[p] = w * loss.value(x, y);
    });
    let err = acc.pop().expect("error slot");
    Ok((err, acc))
}

/// Central finite differences of [`error_at`].
pub fn fd_gradient(theta: &[f64], d: usize, loss: &LossSpec, m: &Measure, rule: VolumeRule) -> Result<Vec<f64>> {
    let mut probe = theta.to_vec();
    let mut g = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let h = 1e-6 * theta[i].abs().max(1.0);
        probe[i] = theta[i] + h;
        let up = error_at(&probe, d, loss, m, rule)?;
        probe[i] = theta[i] - h;
        let down = error_at(&probe, d, loss, m, rule)?;
        probe[i] = theta[i];
        g.push((up - down) / (2.0 * h));
    }
    Ok(g)
}

/// Plain gradient descent on the flat parameter vector. Returns the
/// best-seen tuple and the full trajectory.
pub fn train(cfg: &TrainConfig, loss: &LossSpec, m: &Measure) -> Result<(EffectiveTuple, Trajectory)> {
    cfg.check()?;
    let d_in = m.dim();
    let mut theta = if cfg.init.zero {
        vec![0.0; NetworkConfig::param_count_for(cfg.d, d_in)]
    } else {
        initial_tuple(cfg.d, &cfg.init, loss, m)?.to_network().to_flat()
    };
    let mut traj = Trajectory { best_err: f64::INFINITY, ..Trajectory::default() };
    let mut best_theta = theta.clone();

    for step in 0..cfg.steps {
        let (err, grad) = match cfg.gradient {
            GradientMode::Analytic => error_and_gradient(&theta, cfg.d, loss, m, cfg.quadrature)?,
            GradientMode::FiniteDifference => (
                error_at(&theta, cfg.d, loss, m, cfg.quadrature)?,
                fd_gradient(&theta, cfg.d, loss, m, cfg.quadrature)?,
            ),
        };
        let grad_norm = norm(&grad);
        if !err.is_finite() || !grad_norm.is_finite() {
            return Err(Error::NonFiniteLoss { step, trajectory: Box::new(traj) });
        }
        traj.records.push(StepRecord { step, err, param_norm: norm(&theta), grad_norm });
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
            traj.snapshots.push((step, NetworkConfig::from_flat(&theta, cfg.d, d_in)?.to_effective()));
        }
        if err < traj.best_err {
            traj.best_err = err;
            traj.best_step = step;
            best_theta.copy_from_slice(&theta);
        }
        theta.iter_mut().zip(&grad).for_each(|(t, g)| *t -= cfg.step_size * g);
    }
    let best = NetworkConfig::from_flat(&best_theta, cfg.d, d_in)?.to_effective();
    Ok((best, traj))
}
