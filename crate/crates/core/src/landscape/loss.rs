use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Target;
use crate::error::{Error, Result};
use crate::geometry::HalfSpace;
use crate::quadrature::Measure;

pub type PointLoss = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossMeta {
    pub convex_in_y: bool,
    pub strictly_convex: bool,
    pub attains_min: bool,
    pub p: Option<f64>,
}

/// Pointwise loss `L(x, y)`, optionally tied to a regression target.
#[derive(Clone)]
pub struct LossSpec {
    name: String,
    pointwise: PointLoss,
    derivative: Option<PointLoss>,
    target: Option<Target>,
    pub meta: LossMeta,
}

impl fmt::Debug for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LossSpec")
            .field("name", &self.name)
            .field("target", &self.target)
            .field("meta", &self.meta)
            .finish()
    }
}

impl LossSpec {
    /// Arbitrary loss; metadata flags default to unset.
    pub fn custom(name: impl Into<String>, f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            pointwise: Arc::new(f),
            derivative: None,
            target: None,
            meta: LossMeta::default(),
        }
    }

    pub fn with_derivative(mut self, df: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(df));
        self
    }

    pub fn with_meta(mut self, meta: LossMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Attaches the regression target whose breaklines the loss inherits.
    pub fn with_target(mut self, target: Target) -> Self {
        self.target = Some(target);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn target(&self) -> Option<&Target> {
        self.target.as_ref()
    }

    pub fn value(&self, x: &[f64], y: f64) -> f64 {
        (self.pointwise)(x, y)
    }

    /// `∂L/∂y`, analytic when available, else a central difference.
    pub fn dy(&self, x: &[f64], y: f64) -> f64 {
        match &self.derivative {
            Some(df) => df(x, y),
            None => {
                let h = 1e-6 * (1.0 + y.abs());
                (self.value(x, y + h) - self.value(x, y - h)) / (2.0 * h)
            }
        }
    }

    /// Hyperplanes across which `L(·, y)` may be non-smooth.
    pub fn cuts(&self, d_in: usize) -> Vec<HalfSpace> {
        self.target.as_ref().map(|t| t.cuts(d_in)).unwrap_or_default()
    }
}

/// `L(x, y) = |y − f(x)|^p`.
pub fn lp_loss(target: Target, p: f64) -> Result<LossSpec> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    let (t1, t2) = (target.clone(), target.clone());
    let (pointwise, derivative): (PointLoss, PointLoss) = if p == 2.0 {
        (
            Arc::new(move |x, y| {
                let r = y - t1.eval(x);
                r * r
            }),
            Arc::new(move |x, y| 2.0 * (y - t2.eval(x))),
        )
    } else {
        (
            Arc::new(move |x, y| (y - t1.eval(x)).abs().powf(p)),
            Arc::new(move |x, y| {
                let r = y - t2.eval(x);
                p * r.abs().powf(p - 1.0) * r.signum()
            }),
        )
    };
    Ok(LossSpec {
        name: format!("L{p}"),
        pointwise,
        derivative: Some(derivative),
        target: Some(target),
        meta: LossMeta {
            convex_in_y: true,
            strictly_convex: true,
            attains_min: true,
            p: Some(p),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum AuditViolation {
    NotStrictlyConvex { x: Vec<f64>, y1: f64, y2: f64 },
    NotCoercive { x: Vec<f64>, towards_negative: bool },
    NoInteriorMinimum { x: Vec<f64>, argmin: f64 },
}

impl fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditViolation::NotStrictlyConvex { x, y1, y2 } => write!(
                f,
                "strict convexity fails at x = {x:?}: L(x, (y1 + y2)/2) >= mean for y1 = {y1}, y2 = {y2}"
            ),
            AuditViolation::NotCoercive { x, towards_negative } => write!(
                f,
                "L(x, y) does not grow as y -> {}inf at x = {x:?}",
                if *towards_negative { "-" } else { "+" }
            ),
            AuditViolation::NoInteriorMinimum { x, argmin } => {
                write!(f, "no interior minimum at x = {x:?}: probe ended at y = {argmin}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub points_checked: usize,
    pub violations: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn strictly_convex(&self) -> bool {
        !self
            .violations
            .iter()
            .any(|v| matches!(v, AuditViolation::NotStrictlyConvex { .. }))
    }
}

const AUDIT_GRID: [f64; 9] = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0];
const COERCIVE_PROBES: [f64; 3] = [10.0, 100.0, 1000.0];
const MIN_PROBE_RANGE: f64 = 1000.0;

/// Golden-section search for `argmin g` on `[a, b]`.
pub(crate) fn golden_section(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..iters {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

/// Spot-checks strict convexity, coercivity and attainment of `L(x, ·)` at
/// `samples` seeded points of the domain.
pub fn loss_audit(loss: &LossSpec, m: &Measure, samples: usize) -> AuditReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut report = AuditReport::default();
    for _ in 0..samples {
        let x = m.domain.sample(&mut rng);
        report.points_checked += 1;
        let l = |y: f64| loss.value(&x, y);

        'convex: for (i, &y1) in AUDIT_GRID.iter().enumerate() {
            for &y2 in &AUDIT_GRID[i + 1..] {
                let avg = 0.5 * (l(y1) + l(y2));
                if !(l(0.5 * (y1 + y2)) < avg - 1e-12 * (1.0 + avg.abs())) {
                    report.violations.push(AuditViolation::NotStrictlyConvex { x: x.clone(), y1, y2 });
                    break 'convex;
                }
            }
        }

        for towards_negative in [false, true] {
            let s = if towards_negative { -1.0 } else { 1.0 };
            let vals: Vec<f64> = COERCIVE_PROBES.iter().map(|&y| l(s * y)).collect();
            if !vals.windows(2).all(|w| w[0] < w[1]) {
                report.violations.push(AuditViolation::NotCoercive { x: x.clone(), towards_negative });
            }
        }

        // The probe fails when the far end of the range is as good as the
        // best point found, e.g. when the loss only decays towards a limit.
        let argmin = golden_section(l, -MIN_PROBE_RANGE, MIN_PROBE_RANGE, 200);
        if l(-MIN_PROBE_RANGE).min(l(MIN_PROBE_RANGE)) <= l(argmin) {
            report.violations.push(AuditViolation::NoInteriorMinimum { x: x.clone(), argmin });
        }
    }
    report
}
