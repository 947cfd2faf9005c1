use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Measure, SurfaceRule, VolumeRule};
use crate::error::{Error, Result};
use crate::geometry::{dot, hyperplane_patch, split_box_2d, split_polygon, HalfSpace, Polygon};

type Rule = Arc<[(f64, f64)]>;

/// Gauss-Legendre `(node, weight)` pairs on `[−1, 1]`, cached per order.
pub(crate) fn gauss_legendre(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("gauss cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let n = NonZeroUsize::new(n).expect("gauss order must be positive");
            GaussLegendre::new(n).as_node_weight_pairs().iter().copied().collect()
        })
        .clone()
}

/// Flat list of points with weights that already include the density.
#[derive(Debug, Clone, Default)]
pub struct Nodes {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Nodes {
    fn new(dim: usize) -> Self {
        Self { dim, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn push(&mut self, x: &[f64], w: f64) {
        self.points.extend_from_slice(x);
        self.weights.push(w);
    }

    /// Multiplies every weight by `h(x)`.
    fn apply_density(mut self, m: &Measure) -> Result<Self> {
        for i in 0..self.len() {
            let h = m.density_at(self.point(i));
            if !h.is_finite() {
                return Err(Error::NonFiniteIntegrand(self.point(i).to_vec()));
            }
            self.weights[i] *= h;
        }
        Ok(self)
    }
}

fn push_interval(out: &mut Nodes, a: f64, b: f64, rule: &[(f64, f64)], map: impl Fn(f64) -> Vec<f64>) {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    for &(t, w) in rule {
        out.push(&map(c + r * t), r * w);
    }
}

fn push_rect(out: &mut Nodes, lo: [f64; 2], hi: [f64; 2], rule: &[(f64, f64)], map: &impl Fn([f64; 2]) -> Vec<f64>) {
    let (cx, rx) = (0.5 * (lo[0] + hi[0]), 0.5 * (hi[0] - lo[0]));
    let (cy, ry) = (0.5 * (lo[1] + hi[1]), 0.5 * (hi[1] - lo[1]));
    for &(s, ws) in rule {
        for &(t, wt) in rule {
            out.push(&map([cx + rx * s, cy + ry * t]), rx * ry * ws * wt);
        }
    }
}

/// Collapsed-square rule on a triangle.
fn push_triangle(out: &mut Nodes, tri: [[f64; 2]; 3], rule: &[(f64, f64)], map: &impl Fn([f64; 2]) -> Vec<f64>) {
    let [a, b, c] = tri;
    let cross = ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
    for &(s, ws) in rule {
        let u = 0.5 * (s + 1.0);
        for &(t, wt) in rule {
            let v = 0.5 * (t + 1.0);
            let p = [
                a[0] + u * (b[0] - a[0]) + u * v * (c[0] - b[0]),
                a[1] + u * (b[1] - a[1]) + u * v * (c[1] - b[1]),
            ];
            out.push(&map(p), 0.25 * ws * wt * cross * u);
        }
    }
}

fn push_polygon(out: &mut Nodes, poly: &Polygon, rule: &[(f64, f64)], map: &impl Fn([f64; 2]) -> Vec<f64>) {
    if let Some((lo, hi)) = poly.as_rect() {
        push_rect(out, lo, hi, rule, map);
    } else {
        for tri in poly.triangles() {
            push_triangle(out, tri, rule, map);
        }
    }
}

/// Whole-box tensor product of a 1-d rule.
fn push_box(out: &mut Nodes, m: &Measure, rule_1d: &[(f64, f64)]) {
    let d = m.dim();
    let dom = &m.domain;
    let n = rule_1d.len();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    loop {
        let mut w = 1.0;
        for k in 0..d {
            let (t, wk) = rule_1d[idx[k]];
            let (c, r) = (0.5 * (dom.lower[k] + dom.upper[k]), 0.5 * (dom.upper[k] - dom.lower[k]));
            x[k] = c + r * t;
            w *= r * wk;
        }
        out.push(&x, w);
        let mut k = 0;
        loop {
            if k == d {
                return;
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn midpoint_rule(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| (-1.0 + (2 * i + 1) as f64 / n as f64, 2.0 / n as f64))
        .collect()
}

/// Volume nodes for `rule`, honouring `cuts` where the rule supports it.
pub fn volume_nodes(m: &Measure, rule: VolumeRule, cuts: &[HalfSpace]) -> Result<Nodes> {
    rule.check()?;
    let d = m.dim();
    if let Some(h) = cuts.iter().find(|h| h.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: h.dim() });
    }
    let dom = &m.domain;
    let mut out = Nodes::new(d);
    match rule {
        VolumeRule::TensorGauss { points } => {
            let g = gauss_legendre(points);
            match d {
                1 => {
                    let mut breaks: Vec<f64> = cuts
                        .iter()
                        .map(|h| h.offset * h.normal[0])
                        .filter(|b| *b > dom.lower[0] && *b < dom.upper[0])
                        .collect();
                    breaks.push(dom.lower[0]);
                    breaks.push(dom.upper[0]);
                    breaks.sort_by(f64::total_cmp);
                    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
                    for w in breaks.windows(2) {
                        push_interval(&mut out, w[0], w[1], &g, |x| vec![x]);
                    }
                }
                2 => {
                    let id = |p: [f64; 2]| p.to_vec();
                    for cell in split_box_2d(dom, cuts) {
                        push_polygon(&mut out, &cell, &g, &id);
                    }
                }
                _ => push_box(&mut out, m, &g),
            }
        }
        VolumeRule::Midpoint { points } => push_box(&mut out, m, &midpoint_rule(points)),
        VolumeRule::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = dom.volume() / samples as f64;
            for _ in 0..samples {
                out.push(&dom.sample(&mut rng), w);
            }
        }
    }
    out.apply_density(m)
}

/// Nodes on `H ∩ box` for `∫ f h dσ`, split along `cuts` inside the section.
pub fn surface_nodes(plane: &HalfSpace, m: &Measure, rule: SurfaceRule, cuts: &[HalfSpace]) -> Result<Nodes> {
    if rule.points < 1 {
        return Err(Error::InvalidArgument("surface rule needs at least one point".into()));
    }
    let chart = hyperplane_patch(plane, &m.domain)?;
    let d = m.dim();
    let mut out = Nodes::new(d);
    let g = gauss_legendre(rule.points);
    match d {
        1 => out.push(&chart.origin, 1.0),
        2 => {
            let t = &chart.tangents[0];
            let (lo, hi) = (chart.lower[0], chart.upper[0]);
            let mut breaks: Vec<f64> = cuts
                .iter()
                .filter_map(|c| {
                    let rate = dot(&c.normal, t);
                    (rate.abs() > 1e-14).then(|| (c.offset - dot(&c.normal, &chart.origin)) / rate)
                })
                .filter(|s| *s > lo && *s < hi)
                .collect();
            breaks.push(lo);
            breaks.push(hi);
            breaks.sort_by(f64::total_cmp);
            breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
            for w in breaks.windows(2) {
                push_interval(&mut out, w[0], w[1], &g, |s| chart.point(&[s]));
            }
        }
        3 => {
            let section = chart.section.clone().expect("3-d chart carries its section");
            let lines: Vec<([f64; 2], f64)> = cuts
                .iter()
                .filter_map(|c| {
                    let a = [dot(&c.normal, &chart.tangents[0]), dot(&c.normal, &chart.tangents[1])];
                    (a[0].hypot(a[1]) > 1e-14).then(|| (a, c.offset - dot(&c.normal, &chart.origin)))
                })
                .collect();
            let map = |p: [f64; 2]| chart.point(&p);
            for cell in split_polygon(section, &lines) {
                push_polygon(&mut out, &cell, &g, &map);
            }
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "surface quadrature supports d_in <= 3, got {d}"
            )))
        }
    }
    out.apply_density(m)
}
