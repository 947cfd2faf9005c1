use serde::Serialize;

use super::{find_dependence, kappa_min, kappa_perturb, make_splits, DependenceVector, PerturbSign, SplitParts};
use crate::error::{Error, Result};
use crate::geometry::HalfSpace;
use crate::landscape::{loss_audit, LossSpec};
use crate::par;
use crate::quadrature::{error_functional, surface_nodes, Measure, SurfaceRule, VolumeRule};
use crate::response::GeneralizedResponse;

/// A perturbation improves when its error is below `err(R)` by more than this.
pub const IMPROVEMENT_TOL: f64 = 1e-9;
/// Gauss nodes per piece for the segment average of the loss.
pub const SEGMENT_POINTS: usize = 16;
const ON_BREAKLINE_TOL: f64 = 1e-10;
const AUDIT_SAMPLES: usize = 16;

fn check_on(h: &HalfSpace, x: &[f64]) -> Result<()> {
    let dist = h.signed_distance(x).abs();
    if dist < ON_BREAKLINE_TOL {
        Ok(())
    } else {
        Err(Error::OffBreakline(dist))
    }
}

fn alpha_of(dep: &DependenceVector, j: usize) -> Result<f64> {
    dep.alpha(j).ok_or(Error::NotInSupport(j))
}

/// Lengths of the parts of `[min(t₋, t₊), max(t₋, t₊)]` on either side of
/// 0, with `t_± = −(δ_j^±·x′ + 𝔟_j^±)/α_j`: how far the slab of `R^{±κ}`
/// extends into `A_j` and into its complement, in units of `1/κ`.
pub fn q_values(
    r: &GeneralizedResponse,
    j: usize,
    xprime: &[f64],
    dep: &DependenceVector,
    splits: &SplitParts,
) -> Result<(f64, f64)> {
    let s = r
        .summands
        .get(j)
        .ok_or(Error::IndexOutOfRange { index: j, len: r.summands.len() })?;
    check_on(&s.halfspace, xprime)?;
    let alpha = alpha_of(dep, j)?;
    let p = &splits.parts[j];
    let t_plus = -p.plus(xprime) / alpha;
    let t_minus = -p.minus(xprime) / alpha;
    let (lo, hi) = (t_plus.min(t_minus), t_plus.max(t_minus));
    Ok((hi.max(0.0) - lo.max(0.0), hi.min(0.0) - lo.min(0.0)))
}

/// `(L̄, L⁺, L⁻)` at `x′ ∈ H_j`: the losses at the two one-sided values of
/// `R` across `H_j` and the mean loss on the segment between them. The
/// other summands enter through their plus or minus side at `x′`.
pub fn segment_average_loss(
    loss: &LossSpec,
    r: &GeneralizedResponse,
    xprime: &[f64],
    j: usize,
    splits: &SplitParts,
    quad_points: usize,
) -> Result<(f64, f64, f64)> {
    if j >= r.summands.len() {
        return Err(Error::IndexOutOfRange { index: j, len: r.summands.len() });
    }
    check_on(&r.summands[j].halfspace, xprime)?;
    let rest: f64 = splits.bias
        + r.summands
            .iter()
            .zip(&splits.parts)
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, (s, p))| if s.halfspace.contains(xprime) { p.plus(xprime) } else { p.minus(xprime) })
            .sum::<f64>();
    let y_plus = splits.parts[j].plus(xprime) + rest;
    let y_minus = splits.parts[j].minus(xprime) + rest;
    let l_plus = loss.value(xprime, y_plus);
    let l_minus = loss.value(xprime, y_minus);
    Ok((segment_mean(loss, xprime, y_minus, y_plus, quad_points), l_plus, l_minus))
}

/// Mean of `L(x, ·)` on `[a, b]`, split at the target value where `L` may kink.
fn segment_mean(loss: &LossSpec, x: &[f64], a: f64, b: f64, points: usize) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    if hi - lo <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
        return loss.value(x, 0.5 * (lo + hi));
    }
    let mut breaks = vec![lo];
    if let Some(t) = loss.target() {
        let y = t.eval(x);
        if y > lo && y < hi {
            breaks.push(y);
        }
    }
    breaks.push(hi);
    let g = crate::quadrature::gauss_legendre(points.max(1));
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        total += g.iter().map(|&(t, wt)| h * wt * loss.value(x, c + h * t)).sum::<f64>();
    }
    total / (hi - lo)
}

/// Hyperplanes on `H_j` where the decrement integrand may be non-smooth.
fn decrement_cuts(r: &GeneralizedResponse, j: usize, splits: &SplitParts, loss: &LossSpec) -> Vec<HalfSpace> {
    let mut cuts: Vec<HalfSpace> = r
        .summands
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, s)| s.halfspace.clone())
        .collect();
    let p = &splits.parts[j];
    let s = &r.summands[j];
    cuts.extend(HalfSpace::from_affine(&p.delta_plus, p.b_plus));
    cuts.extend(HalfSpace::from_affine(&p.delta_minus, p.b_minus));
    cuts.extend(HalfSpace::from_affine(&s.delta, s.jump));
    cuts.extend(loss.cuts(r.d_in()));
    cuts
}

/// First-order change `lim κ·(err(R^κ) + err(R^{−κ}) − 2 err(R))`:
/// `Σ_j ∫_{H_j} h q_j (2L̄_j − L_j⁺ − L_j⁻) dσ` with `q_j = q₊ + q₋`.
pub fn limit_decrement(
    r: &GeneralizedResponse,
    dep: &DependenceVector,
    splits: &SplitParts,
    loss: &LossSpec,
    m: &Measure,
    srule: SurfaceRule,
) -> Result<f64> {
    let mut total = 0.0;
    for &j in &dep.support {
        let plane = &r.summands[j].halfspace;
        let nodes = match surface_nodes(plane, m, srule, &decrement_cuts(r, j, splits, loss)) {
            Ok(n) => n,
            Err(Error::NoIntersection) => continue,
            Err(e) => return Err(e),
        };
        let terms = par::map(nodes.len(), |i| -> Result<f64> {
            // Snap onto the plane to absorb rounding in the chart.
            let x = plane.project(nodes.point(i));
            let (qp, qm) = q_values(r, j, &x, dep, splits)?;
            let (lbar, lp, lm) = segment_average_loss(loss, r, &x, j, splits, SEGMENT_POINTS)?;
            Ok(nodes.weights[i] * (qp + qm) * (2.0 * lbar - lp - lm))
        });
        for t in terms {
            total += t?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub kappa_grid: Vec<f64>,
    pub kappa_min: f64,
    pub err_r: f64,
    pub err_plus: Vec<f64>,
    pub err_minus: Vec<f64>,
    /// `κ·(err⁺ + err⁻ − 2 err(R))` per κ.
    pub scaled_sum: Vec<f64>,
    pub decrement: f64,
    pub improving_kappa: Option<f64>,
}

/// Evaluates `R^{±κ}` over `kappa_grid` and compares the finite-κ second
/// differences with [`limit_decrement`].
pub fn verify_improvement(
    r: &GeneralizedResponse,
    loss: &LossSpec,
    m: &Measure,
    kappa_grid: &[f64],
) -> Result<PerturbationReport> {
    verify_improvement_with(r, loss, m, kappa_grid, SurfaceRule::default())
}

/// [`verify_improvement`] with an explicit surface rule for the decrement.
pub fn verify_improvement_with(
    r: &GeneralizedResponse,
    loss: &LossSpec,
    m: &Measure,
    kappa_grid: &[f64],
    srule: SurfaceRule,
) -> Result<PerturbationReport> {
    r.ensure_valid()?;
    if !loss_audit(loss, m, AUDIT_SAMPLES).strictly_convex() {
        return Err(Error::NotStrictlyConvex);
    }
    let rule = VolumeRule::for_piecewise(m.dim());
    let err_r = error_functional(r, loss, m, rule)?;
    let Some(dep) = find_dependence(r) else {
        let n = kappa_grid.len();
        return Ok(PerturbationReport {
            kappa_grid: kappa_grid.to_vec(),
            kappa_min: 0.0,
            err_r,
            err_plus: vec![err_r; n],
            err_minus: vec![err_r; n],
            scaled_sum: vec![0.0; n],
            decrement: 0.0,
            improving_kappa: None,
        });
    };
    let rs = &dep.response;
    let splits = make_splits(rs, &dep.vector)?;
    let decrement = limit_decrement(rs, &dep.vector, &splits, loss, m, srule)?;
    let kmin = kappa_min(&dep.vector, &splits, &m.domain);

    let rows = par::map_slice(kappa_grid, |&kappa| -> Result<(f64, f64)> {
        let plus = kappa_perturb(rs, &dep.vector, &splits, &m.domain, kappa, PerturbSign::Plus)?;
        let minus = kappa_perturb(rs, &dep.vector, &splits, &m.domain, kappa, PerturbSign::Minus)?;
        Ok((error_functional(&plus, loss, m, rule)?, error_functional(&minus, loss, m, rule)?))
    });
    let mut report = PerturbationReport {
        kappa_grid: kappa_grid.to_vec(),
        kappa_min: kmin,
        err_r,
        err_plus: Vec::with_capacity(rows.len()),
        err_minus: Vec::with_capacity(rows.len()),
        scaled_sum: Vec::with_capacity(rows.len()),
        decrement,
        improving_kappa: None,
    };
    for (&kappa, row) in kappa_grid.iter().zip(rows) {
        let (ep, em) = row?;
        report.err_plus.push(ep);
        report.err_minus.push(em);
        report.scaled_sum.push(kappa * (ep + em - 2.0 * err_r));
        if report.improving_kappa.is_none() && ep.min(em) < err_r - IMPROVEMENT_TOL {
            report.improving_kappa = Some(kappa);
        }
    }
    Ok(report)
}
