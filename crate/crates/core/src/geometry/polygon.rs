//! Convex polygons in the plane and exact box subdivision along lines.

use super::{BoxDomain, HalfSpace};

const AREA_EPS: f64 = 1e-14;

/// Convex polygon, vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn rect(lower: [f64; 2], upper: [f64; 2]) -> Self {
        Self {
            vertices: vec![
                [lower[0], lower[1]],
                [upper[0], lower[1]],
                [upper[0], upper[1]],
                [lower[0], upper[1]],
            ],
        }
    }

    /// Orders arbitrary points of a convex polygon counter-clockwise.
    pub fn from_unordered(mut pts: Vec<[f64; 2]>) -> Self {
        let n = pts.len() as f64;
        let c = pts
            .iter()
            .fold([0.0, 0.0], |a, p| [a[0] + p[0] / n, a[1] + p[1] / n]);
        pts.sort_by(|a, b| {
            let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
            let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
            ta.total_cmp(&tb)
        });
        pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
        Self { vertices: pts }
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return 0.0;
        }
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
    }

    /// Part of the polygon where `a·p − c` has the requested sign (closed).
    pub fn clip(&self, a: [f64; 2], c: f64, keep_positive: bool) -> Polygon {
        let s = if keep_positive { 1.0 } else { -1.0 };
        let val = |p: &[f64; 2]| s * (a[0] * p[0] + a[1] * p[1] - c);
        let v = &self.vertices;
        let n = v.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let (p, q) = (v[i], v[(i + 1) % n]);
            let (fp, fq) = (val(&p), val(&q));
            if fp >= 0.0 {
                out.push(p);
            }
            if (fp > 0.0 && fq < 0.0) || (fp < 0.0 && fq > 0.0) {
                let t = fp / (fp - fq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        Polygon { vertices: out }
    }

    /// Axis-aligned rectangle bounds, if the polygon is one.
    pub fn as_rect(&self) -> Option<([f64; 2], [f64; 2])> {
        if self.vertices.len() != 4 {
            return None;
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let tol = 1e-13 * (1.0 + (hi[0] - lo[0]).abs() + (hi[1] - lo[1]).abs());
        let on_corner = |p: &[f64; 2]| {
            ((p[0] - lo[0]).abs() < tol || (p[0] - hi[0]).abs() < tol)
                && ((p[1] - lo[1]).abs() < tol || (p[1] - hi[1]).abs() < tol)
        };
        self.vertices.iter().all(on_corner).then_some((lo, hi))
    }

    /// Fan triangulation from the first vertex.
    pub fn triangles(&self) -> impl Iterator<Item = [[f64; 2]; 3]> + '_ {
        let v = &self.vertices;
        (1..v.len().saturating_sub(1)).map(move |i| [v[0], v[i], v[i + 1]])
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vertices.len() as f64;
        self.vertices
            .iter()
            .fold([0.0, 0.0], |a, p| [a[0] + p[0] / n, a[1] + p[1] / n])
    }
}

/// Splits a polygon along every line `a·p = c`, dropping slivers.
pub fn split_polygon(start: Polygon, lines: &[([f64; 2], f64)]) -> Vec<Polygon> {
    let min_area = AREA_EPS * start.area().abs().max(1e-300);
    let mut cells = vec![start];
    for &(a, c) in lines {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for p in cells {
            let pos = p.clip(a, c, true);
            let neg = p.clip(a, c, false);
            let (ap, an) = (pos.area(), neg.area());
            if ap > min_area && an > min_area {
                next.push(pos);
                next.push(neg);
            } else {
                next.push(p);
            }
        }
        cells = next;
    }
    cells
}

/// Cells of a 2-d box cut by the boundaries of `cuts`.
pub fn split_box_2d(domain: &BoxDomain, cuts: &[HalfSpace]) -> Vec<Polygon> {
    assert_eq!(domain.dim(), 2, "split_box_2d needs a planar box");
    let lines: Vec<([f64; 2], f64)> = cuts
        .iter()
        .filter(|h| domain.cut_by(h))
        .map(|h| ([h.normal[0], h.normal[1]], h.offset))
        .collect();
    split_polygon(
        Polygon::rect(
            [domain.lower[0], domain.lower[1]],
            [domain.upper[0], domain.upper[1]],
        ),
        &lines,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitVector;

    #[test]
    fn split_preserves_area() {
        let d = BoxDomain::cube(2, 1.0);
        let cuts = vec![
            HalfSpace::new(UnitVector::normalize(vec![1.0, 1.0]).unwrap(), 0.1),
            HalfSpace::new(UnitVector::normalize(vec![-1.0, 2.0]).unwrap(), -0.2),
            HalfSpace::new(UnitVector::normalize(vec![0.0, 1.0]).unwrap(), 0.5),
        ];
        let cells = split_box_2d(&d, &cuts);
        assert!(cells.len() >= 6);
        let total: f64 = cells.iter().map(Polygon::area).sum();
        assert!((total - 4.0).abs() < 1e-13);
        assert!(cells.iter().all(|c| c.area() > 0.0));
    }

    #[test]
    fn axis_cuts_give_rectangles() {
        let d = BoxDomain::cube(2, 1.0);
        let cuts = vec![HalfSpace::new(UnitVector::axis(2, 0), -0.3)];
        let cells = split_box_2d(&d, &cuts);
        assert_eq!(cells.len(), 2);
        assert!(cells.iter().all(|c| c.as_rect().is_some()));
    }

    #[test]
    fn unordered_points_sorted_ccw() {
        let p = Polygon::from_unordered(vec![[1.0, 1.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!((p.area() - 1.0).abs() < 1e-15);
    }
}
