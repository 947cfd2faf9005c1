use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::response::{GeneralizedResponse, TOL_RANK};

/// Positive coefficients `α_j` with `Σ_{j∈𝕀} α_j 𝔫_j = 0` over a minimal
/// set 𝕀 of multiplicity-2 summands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceVector {
    pub support: Vec<usize>,
    pub alphas: Vec<f64>,
}

impl DependenceVector {
    pub fn contains(&self, j: usize) -> bool {
        self.support.contains(&j)
    }

    /// `α_j` for summand `j`, if it is in the support.
    pub fn alpha(&self, j: usize) -> Option<f64> {
        self.support.iter().position(|&i| i == j).map(|k| self.alphas[k])
    }
}

/// A dependence vector together with the response after the side switches
/// that made every coefficient positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Dependence {
    pub response: GeneralizedResponse,
    pub vector: DependenceVector,
}

fn normal_matrix(r: &GeneralizedResponse, idx: &[usize]) -> DMatrix<f64> {
    let d = r.d_in();
    DMatrix::from_fn(d, idx.len(), |i, k| r.summands[idx[k]].halfspace.normal[i])
}

/// A unit null vector of the columns `idx`, if the columns are dependent.
fn null_vector(r: &GeneralizedResponse, idx: &[usize]) -> Option<Vec<f64>> {
    if idx.is_empty() {
        return None;
    }
    // Pad with zero rows so the SVD yields a full set of right vectors.
    let a = normal_matrix(r, idx);
    let n = idx.len();
    let rows = a.nrows().max(n);
    let padded = DMatrix::from_fn(rows, n, |i, k| if i < a.nrows() { a[(i, k)] } else { 0.0 });
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    (*s <= TOL_RANK).then(|| v_t.row(k).iter().copied().collect())
}

/// Finds a minimal linear dependence among the normals of the
/// multiplicity-2 summands and switches sides where needed so that all
/// coefficients are positive. `None` if those normals are independent.
pub fn find_dependence(r: &GeneralizedResponse) -> Option<Dependence> {
    let mut support: Vec<usize> = (0..r.summands.len())
        .filter(|&k| r.summands[k].multiplicity == 2)
        .collect();
    null_vector(r, &support)?;
    // Dropping every index whose removal keeps a dependence leaves a circuit.
    let mut k = 0;
    while k < support.len() {
        let mut trial = support.clone();
        trial.remove(k);
        if null_vector(r, &trial).is_some() {
            support = trial;
        } else {
            k += 1;
        }
    }
    let mut v = null_vector(r, &support).expect("circuit is dependent");
    if v[0] < 0.0 {
        v.iter_mut().for_each(|c| *c = -*c);
    }
    let scale = v[0];
    let mut response = r.clone();
    let mut alphas = Vec::with_capacity(v.len());
    for (&j, c) in support.iter().zip(&v) {
        if *c < 0.0 {
            response = response.switch_sides(j).expect("index from support");
        }
        alphas.push(c.abs() / scale);
    }
    Some(Dependence { response, vector: DependenceVector { support, alphas } })
}
