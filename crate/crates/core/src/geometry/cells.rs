use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BoxDomain, HalfSpace};
use crate::error::{Error, Result};
use crate::par;

/// Tolerance for deciding that two half-spaces share their boundary.
pub(crate) const TOL_SAME_BOUNDARY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Membership {
    Inside,
    Outside,
}

/// Membership pattern of an open cell `A_J`: inside for `j ∈ J`, in the closed
/// complement otherwise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellSignature {
    pub membership: Vec<Membership>,
}

impl CellSignature {
    pub fn of_point(halfspaces: &[HalfSpace], x: &[f64]) -> Self {
        Self {
            membership: halfspaces
                .iter()
                .map(|h| if h.contains(x) { Membership::Inside } else { Membership::Outside })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    pub fn is_inside(&self, j: usize) -> bool {
        self.membership[j] == Membership::Inside
    }
}

/// Seeded uniform sampling of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampler {
    pub samples: usize,
    pub seed: u64,
}

impl Sampler {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed }
    }

    pub fn points(&self, domain: &BoxDomain) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.samples).map(|_| domain.sample(&mut rng)).collect()
    }
}

/// Fails with [`Error::DuplicateBoundary`] if two half-spaces share a boundary.
pub fn check_distinct_boundaries(halfspaces: &[HalfSpace]) -> Result<()> {
    for i in 0..halfspaces.len() {
        for j in i + 1..halfspaces.len() {
            if halfspaces[i]
                .boundary_relation(&halfspaces[j], TOL_SAME_BOUNDARY)
                .is_some()
            {
                return Err(Error::DuplicateBoundary(i, j));
            }
        }
    }
    Ok(())
}

/// Monte-Carlo enumeration of the arrangement cells met by the sample.
///
/// Returns each observed signature with its estimated Lebesgue volume, in
/// signature order.
pub fn enumerate_cells(
    halfspaces: &[HalfSpace],
    domain: &BoxDomain,
    sampler: Sampler,
) -> Result<Vec<(CellSignature, f64)>> {
    check_distinct_boundaries(halfspaces)?;
    if let Some(h) = halfspaces.iter().find(|h| h.dim() != domain.dim()) {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: h.dim(),
        });
    }
    if sampler.samples == 0 {
        return Err(Error::InvalidArgument("sampler needs at least one sample".into()));
    }
    let points = sampler.points(domain);
    let sigs = par::map_slice(&points, |x| CellSignature::of_point(halfspaces, x));
    let mut counts: BTreeMap<CellSignature, usize> = BTreeMap::new();
    for s in sigs {
        *counts.entry(s).or_default() += 1;
    }
    let scale = domain.volume() / sampler.samples as f64;
    Ok(counts
        .into_iter()
        .map(|(s, c)| (s, c as f64 * scale))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitVector;

    fn hs(n: Vec<f64>, o: f64) -> HalfSpace {
        HalfSpace::new(UnitVector::normalize(n).unwrap(), o)
    }

    #[test]
    fn strip_has_three_cells() {
        let d = BoxDomain::cube(2, 1.0);
        let hss = vec![hs(vec![1.0, 0.0], -0.3), hs(vec![-1.0, 0.0], -0.3)];
        let cells = enumerate_cells(&hss, &d, Sampler::new(20_000, 1)).unwrap();
        assert_eq!(cells.len(), 3);
        let both_out = CellSignature {
            membership: vec![Membership::Outside, Membership::Outside],
        };
        assert!(cells.iter().all(|(s, _)| *s != both_out));

        // exhaustive 100x100 grid oracle
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..100 {
            for j in 0..100 {
                let x = [-1.0 + (i as f64 + 0.5) / 50.0, -1.0 + (j as f64 + 0.5) / 50.0];
                seen.insert(CellSignature::of_point(&hss, &x));
            }
        }
        let got: std::collections::BTreeSet<_> = cells.iter().map(|(s, _)| s.clone()).collect();
        assert_eq!(seen, got);
    }

    #[test]
    fn no_halfspaces_gives_whole_box() {
        let d = BoxDomain::cube(2, 1.0);
        let cells = enumerate_cells(&[], &d, Sampler::new(100, 3)).unwrap();
        assert_eq!(cells.len(), 1);
        assert!(cells[0].0.is_empty());
        assert!((cells[0].1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn half_plane_measures() {
        let d = BoxDomain::cube(2, 1.0);
        let cells =
            enumerate_cells(&[hs(vec![1.0, 0.0], 0.0)], &d, Sampler::new(1_000_000, 11)).unwrap();
        assert_eq!(cells.len(), 2);
        for (_, m) in &cells {
            assert!((m - 2.0).abs() < 0.01, "{m}");
        }
        let total: f64 = cells.iter().map(|c| c.1).sum();
        assert!((total - 4.0).abs() < 1e-9);
    }

    #[test]
    fn duplicate_boundary_rejected() {
        let d = BoxDomain::cube(2, 1.0);
        let h = hs(vec![1.0, 0.0], 0.2);
        let err = enumerate_cells(&[h.clone(), h.opposite()], &d, Sampler::new(10, 0));
        assert!(matches!(err, Err(Error::DuplicateBoundary(0, 1))));
    }
}
