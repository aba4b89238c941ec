//! Verification of the nodal bounds for non-vanishing eigenvectors.

use serde::{Deserialize, Serialize};

use super::{nodal_count, path_domain_counts, ExactConfig, PathDomainCounts, SignConvention};
use crate::error::{NodalError, Result};
use crate::frustration::{frustration_index_exact, frustration_index_heuristic, DEFAULT_FRUSTRATION_CAP};
use crate::graph::{SignedGraph, DEFAULT_ZERO_TOL};
use crate::linalg::max_abs;
use crate::matrix::DenseSymmetricMatrix;
use crate::spectral::{EigenGroup, DEFAULT_ENTRY_TOL};

/// Outcome of checking `k + (r-1) - nu <= N <= k + f` for one eigenvector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: usize,
    pub r: usize,
    pub nu: usize,
    pub f: usize,
    #[serde(rename = "N")]
    pub n_value: usize,
    #[serde(rename = "exactN")]
    pub exact_n: bool,
    pub lower: i64,
    pub upper: i64,
    pub satisfied: bool,
    /// Lower bound strengthened by the cyclomatic numbers of the good and bad
    /// edge graphs.
    pub refined_lower: i64,
    pub paths: PathDomainCounts,
}

impl BoundReport {
    /// Path-domain bounds: `kappa(G^<=) <= k` and `kappa(G^<) <= k + r - 1`.
    pub fn path_bounds_hold(&self) -> bool {
        self.paths.kappa_le <= self.k && self.paths.kappa_lt < self.k + self.r
    }

    pub fn refined_holds(&self) -> bool {
        !self.exact_n || self.refined_lower <= self.n_value as i64
    }
}

/// Per-matrix data shared by every eigenvector check.
#[derive(Debug, Clone)]
pub struct BoundContext {
    pub graph: SignedGraph,
    pub nu: usize,
    pub f: usize,
    pub f_exact: bool,
    pub exact: ExactConfig,
}

impl BoundContext {
    /// Builds the graph and frustration index; refuses reducible matrices.
    pub fn new(m: &DenseSymmetricMatrix) -> Result<Self> {
        let graph = SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL)?;
        graph.require_connected()?;
        let nu = graph.invariants().nu;
        let (f, f_exact) = if graph.n() <= DEFAULT_FRUSTRATION_CAP {
            (frustration_index_exact(&graph)?.f, true)
        } else {
            (frustration_index_heuristic(&graph, 0, 16).f, false)
        };
        Ok(Self { graph, nu, f, f_exact, exact: ExactConfig::default() })
    }

    pub fn verify(&self, m: &DenseSymmetricMatrix, group: &EigenGroup, phi: &[f64]) -> Result<BoundReport> {
        let x = nonvanishing(phi)?;
        let conv = SignConvention::LaplacianLike;
        let d = nodal_count(&self.graph, m, &x, conv, &self.exact)?;
        let (k, r) = (group.index_k, group.multiplicity_r);
        let lower = k as i64 + r as i64 - 1 - self.nu as i64;
        let upper = (k + self.f) as i64;
        let n_value = d.size as i64;
        let (nu_plus, nu_minus) = split_cyclomatic(&self.graph, m, &x);
        Ok(BoundReport {
            k,
            r,
            nu: self.nu,
            f: self.f,
            n_value: d.size,
            exact_n: d.certified_minimal,
            lower,
            upper,
            satisfied: lower <= n_value && n_value <= upper,
            refined_lower: lower + (nu_plus + nu_minus) as i64,
            paths: path_domain_counts(&self.graph, m, &x, conv, 0.0),
        })
    }
}

/// Zeroes entries below the default relative tolerance and rejects the
/// vector if any remain.
fn nonvanishing(phi: &[f64]) -> Result<Vec<f64>> {
    let tol = DEFAULT_ENTRY_TOL * max_abs(phi);
    let zeros: Vec<usize> = (0..phi.len()).filter(|&i| phi[i].abs() <= tol).collect();
    match zeros.first() {
        Some(&first) => Err(NodalError::Vanishing { count: zeros.len(), first }),
        None => Ok(phi.to_vec()),
    }
}

/// Cyclomatic numbers of the graphs on `M_ij x_i x_j > 0` and `< 0` edges.
fn split_cyclomatic(g: &SignedGraph, m: &DenseSymmetricMatrix, x: &[f64]) -> (usize, usize) {
    let all: Vec<usize> = (0..g.n()).collect();
    let mut pos = 0;
    let mut neg = 0;
    for e in g.edges() {
        if m.get(e.i, e.j) * x[e.i] * x[e.j] > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    let k_pos = g.components_where(&all, |i, j, _| m.get(i, j) * x[i] * x[j] > 0.0).len();
    let k_neg = g.components_where(&all, |i, j, _| m.get(i, j) * x[i] * x[j] < 0.0).len();
    (pos + k_pos - g.n(), neg + k_neg - g.n())
}

/// Checks both generic bounds for a unit, non-vanishing eigenvector of `group`.
pub fn verify_generic_bounds(m: &DenseSymmetricMatrix, group: &EigenGroup, phi: &[f64]) -> Result<BoundReport> {
    BoundContext::new(m)?.verify(m, group, phi)
}

/// Component counts of the positive and negative off-diagonal graphs of
/// `B = D_phi (M - lambda I) D_phi` and the bounds they must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InertiaCounts {
    pub kappa_plus: usize,
    pub kappa_minus: usize,
    /// `n - k - r + 1`, the number of positive eigenvalues of `B`.
    pub positive_eigs: usize,
    /// `k - 1`, the number of negative eigenvalues of `B`.
    pub negative_eigs: usize,
}

impl InertiaCounts {
    pub fn holds(&self) -> bool {
        self.kappa_plus <= self.positive_eigs + 1 && self.kappa_minus <= self.negative_eigs + 1
    }
}

pub fn inertia_counts(m: &DenseSymmetricMatrix, group: &EigenGroup, phi: &[f64]) -> Result<InertiaCounts> {
    let x = nonvanishing(phi)?;
    let g = SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL)?;
    let n = g.n();
    let all: Vec<usize> = (0..n).collect();
    // Off-diagonal entries of B are x_i M_ij x_j; the diagonal shift is irrelevant.
    let kappa_plus = g.components_where(&all, |i, j, _| x[i] * m.get(i, j) * x[j] > 0.0).len();
    let kappa_minus = g.components_where(&all, |i, j, _| x[i] * m.get(i, j) * x[j] < 0.0).len();
    let (k, r) = (group.index_k, group.multiplicity_r);
    Ok(InertiaCounts { kappa_plus, kappa_minus, positive_eigs: n + 1 - k - r, negative_eigs: k - 1 })
}

/// True when `kappa_+ - 1 <= n - k - r + 1` and `kappa_- - 1 <= k - 1`.
pub fn inertia_check(m: &DenseSymmetricMatrix, group: &EigenGroup, phi: &[f64]) -> Result<bool> {
    Ok(inertia_counts(m, group, phi)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eigendecompose, group_eigenvalues, DEFAULT_GROUP_TOL};

    fn neg_path(n: usize) -> DenseSymmetricMatrix {
        DenseSymmetricMatrix::from_fn(n, |i, j| if j == i + 1 { -1.0 } else { 0.0 })
    }

    #[test]
    fn p4_second_eigenvector_is_tight() {
        let m = neg_path(4);
        let spec = eigendecompose(&m).unwrap();
        let groups = group_eigenvalues(&spec, DEFAULT_GROUP_TOL);
        let r = verify_generic_bounds(&m, &groups[1], &groups[1].basis[0]).unwrap();
        assert_eq!((r.k, r.r, r.nu, r.f, r.n_value), (2, 1, 0, 0, 2));
        assert_eq!((r.lower, r.upper), (2, 2));
        assert!(r.satisfied && r.exact_n && r.path_bounds_hold());
    }

    #[test]
    fn unbalanced_triangle_all_eigenvectors() {
        let m = DenseSymmetricMatrix::from_rows(&[
            vec![0.0, -1.0, 1.0],
            vec![-1.0, 0.0, -1.0],
            vec![1.0, -1.0, 0.0],
        ])
        .unwrap();
        let spec = eigendecompose(&m).unwrap();
        for group in group_eigenvalues(&spec, DEFAULT_GROUP_TOL) {
            for phi in &group.basis {
                if let Ok(r) = verify_generic_bounds(&m, &group, phi) {
                    assert_eq!(r.f, 1);
                    assert!(r.satisfied, "{r:?}");
                    assert!(inertia_check(&m, &group, phi).unwrap());
                }
            }
        }
    }

    #[test]
    fn p2_inertia() {
        let m = neg_path(2);
        let spec = eigendecompose(&m).unwrap();
        let groups = group_eigenvalues(&spec, DEFAULT_GROUP_TOL);
        let c = inertia_counts(&m, &groups[0], &groups[0].basis[0]).unwrap();
        assert_eq!((c.kappa_minus, c.negative_eigs), (1, 0));
        assert!(c.holds());
    }

    #[test]
    fn vanishing_and_reducible_are_rejected() {
        let m = neg_path(3);
        let spec = eigendecompose(&m).unwrap();
        let groups = group_eigenvalues(&spec, DEFAULT_GROUP_TOL);
        assert!(matches!(
            verify_generic_bounds(&m, &groups[1], &groups[1].basis[0]),
            Err(NodalError::Vanishing { .. })
        ));
        let d = DenseSymmetricMatrix::identity(2);
        let spec = eigendecompose(&d).unwrap();
        let groups = group_eigenvalues(&spec, DEFAULT_GROUP_TOL);
        assert!(matches!(
            verify_generic_bounds(&d, &groups[0], &[1.0, 1.0]),
            Err(NodalError::Reducible { components: 2 })
        ));
    }
}
