//! Affine charts of hyperplane sections `H ∩ box`.

use super::{dot, norm, BoxDomain, HalfSpace, Polygon};
use crate::error::{Error, Result};

/// `x(s) = origin + Σ_k s_k tangents[k]` with orthonormal tangents.
///
/// `lower`/`upper` bound `H ∩ box` in parameter space. In three dimensions
/// `section` holds the exact section polygon in parameter coordinates; in two
/// dimensions the parameter interval is the exact section.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub origin: Vec<f64>,
    pub tangents: Vec<Vec<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub section: Option<Polygon>,
}

impl Chart {
    pub fn param_dim(&self) -> usize {
        self.tangents.len()
    }

    pub fn point(&self, s: &[f64]) -> Vec<f64> {
        let mut x = self.origin.clone();
        for (sk, t) in s.iter().zip(&self.tangents) {
            x.iter_mut().zip(t).for_each(|(xi, ti)| *xi += sk * ti);
        }
        x
    }

    /// Parameter coordinates of the orthogonal projection of `x` onto the chart.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        let rel: Vec<f64> = x.iter().zip(&self.origin).map(|(a, b)| a - b).collect();
        self.tangents.iter().map(|t| dot(t, &rel)).collect()
    }
}

/// Orthonormal basis of the complement of `n` (Gram-Schmidt on the axes).
fn tangent_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    if d == 2 {
        // fixed orientation (−n₂, n₁) in the plane
        return vec![vec![-n[1], n[0]]];
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d.saturating_sub(1));
    let mut axes: Vec<usize> = (0..d).collect();
    // axes least aligned with n first, for conditioning
    axes.sort_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()));
    for &i in &axes {
        if basis.len() + 1 == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        let c = dot(&v, n);
        v.iter_mut().zip(n).for_each(|(vi, ni)| *vi -= c * ni);
        for b in &basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
        }
        let l = norm(&v);
        if l > 1e-8 {
            basis.push(v.into_iter().map(|x| x / l).collect());
        }
    }
    basis
}

/// Chart covering the section of the boundary of `h` with `domain`.
pub fn hyperplane_patch(h: &HalfSpace, domain: &BoxDomain) -> Result<Chart> {
    let d = domain.dim();
    if h.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h.dim(),
        });
    }
    if !domain.cut_by(h) {
        return Err(Error::NoIntersection);
    }
    let origin: Vec<f64> = h.normal.iter().map(|ni| ni * h.offset).collect();
    let tangents = tangent_basis(&h.normal);
    let mut chart = Chart {
        origin,
        tangents,
        lower: Vec::new(),
        upper: Vec::new(),
        section: None,
    };
    match d {
        1 => {}
        2 => {
            let t = &chart.tangents[0];
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..2 {
                if t[i].abs() > 1e-15 {
                    let a = (domain.lower[i] - chart.origin[i]) / t[i];
                    let b = (domain.upper[i] - chart.origin[i]) / t[i];
                    lo = lo.max(a.min(b));
                    hi = hi.min(a.max(b));
                }
            }
            if !(hi > lo) {
                return Err(Error::NoIntersection);
            }
            chart.lower = vec![lo];
            chart.upper = vec![hi];
        }
        _ => {
            let pts = section_points(h, domain);
            let params: Vec<Vec<f64>> = pts.iter().map(|p| chart.coords(p)).collect();
            let k = chart.param_dim();
            chart.lower = (0..k)
                .map(|i| params.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
                .collect();
            chart.upper = (0..k)
                .map(|i| params.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max))
                .collect();
            if d == 3 {
                let poly = Polygon::from_unordered(params.iter().map(|p| [p[0], p[1]]).collect());
                if poly.area() <= 0.0 {
                    return Err(Error::NoIntersection);
                }
                chart.section = Some(poly);
            }
        }
    }
    Ok(chart)
}

/// Intersections of the hyperplane with the box edges.
fn section_points(h: &HalfSpace, domain: &BoxDomain) -> Vec<Vec<f64>> {
    let d = domain.dim();
    let verts = domain.vertices();
    let mut pts = Vec::new();
    for (mask, v) in verts.iter().enumerate() {
        for axis in 0..d {
            if mask >> axis & 1 == 1 {
                continue;
            }
            let w = &verts[mask | 1 << axis];
            let (fv, fw) = (h.signed_distance(v), h.signed_distance(w));
            if fv == 0.0 {
                pts.push(v.clone());
            }
            if (fv < 0.0 && fw > 0.0) || (fv > 0.0 && fw < 0.0) {
                let t = fv / (fv - fw);
                pts.push(v.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect());
            }
        }
    }
    if let Some(last) = verts.last() {
        if h.signed_distance(last) == 0.0 {
            pts.push(last.clone());
        }
    }
    pts
}
