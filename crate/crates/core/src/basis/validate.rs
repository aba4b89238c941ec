//! Independent checks of a signed basis.

use serde::{Deserialize, Serialize};

use super::construct::SignedBasisResult;
use crate::error::Result;
use crate::graph::{SignedGraph, DEFAULT_ZERO_TOL};
use crate::linalg::{dot, max_abs, norm};
use crate::matrix::DenseSymmetricMatrix;
use crate::nodal::{nodal_count, validate_decomposition, ExactConfig, SignConvention};
use crate::spectral::EigenGroup;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    pub norm_tol: f64,
    pub orth_tol: f64,
    pub residual_tol: f64,
    /// Relative threshold (times `|phi|_inf`) above which an entry's sign binds `eps`.
    pub zero_tol: f64,
    pub exact: ExactConfig,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { norm_tol: 1e-9, orth_tol: 1e-9, residual_tol: 1e-8, zero_tol: 1e-9, exact: ExactConfig::default() }
    }
}

/// Whether `N(eps_s) <= bound` is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundStatus {
    Holds,
    Violated,
    /// Only a heuristic count above the bound is available.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorCheck {
    pub s: usize,
    pub norm_error: f64,
    /// Largest `|<phi_s, phi_t>|` over `t != s`.
    pub max_overlap: f64,
    pub residual: f64,
    /// Vertices where `eps` disagrees with the sign of a non-negligible entry.
    pub sign_conflicts: Vec<usize>,
    #[serde(rename = "N")]
    pub n_value: usize,
    #[serde(rename = "exactN")]
    pub exact_n: bool,
    pub bound: usize,
    pub status: BoundStatus,
    /// Outcome of checking the stored partition; `None` when absent.
    pub partition_error: Option<String>,
    pub partition_size: usize,
}

impl VectorCheck {
    pub fn passes(&self, cfg: &ValidationConfig) -> bool {
        self.norm_error <= cfg.norm_tol
            && self.max_overlap <= cfg.orth_tol
            && self.residual <= cfg.residual_tol
            && self.sign_conflicts.is_empty()
            && self.status == BoundStatus::Holds
            && self.partition_error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub vectors: Vec<VectorCheck>,
    /// True when the vectors number `r` (so they span the eigenspace).
    pub complete: bool,
    pub all_pass: bool,
}

/// Checks norms, orthogonality, eigen-residuals, sign compatibility, the stored
/// partitions and `N(eps_s) <= k + (s-1) + f`.
pub fn validate_signed_basis(
    m: &DenseSymmetricMatrix,
    group: &EigenGroup,
    result: &SignedBasisResult,
    f: usize,
    cfg: &ValidationConfig,
) -> Result<ValidationReport> {
    let g = SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL)?;
    let all: Vec<usize> = (0..m.n()).collect();
    let conv = SignConvention::LaplacianLike;
    let mut checks = Vec::with_capacity(result.vectors.len());
    for (idx, v) in result.vectors.iter().enumerate() {
        let max_overlap = result
            .vectors
            .iter()
            .enumerate()
            .filter(|(t, _)| *t != idx)
            .map(|(_, w)| dot(&v.phi, &w.phi).abs())
            .fold(0.0, f64::max);
        let cut = cfg.zero_tol * max_abs(&v.phi);
        let sign_conflicts: Vec<usize> = (0..v.phi.len())
            .filter(|&i| v.phi[i].abs() > cut && (v.phi[i] > 0.0) != (v.eps[i] > 0))
            .collect();
        let x: Vec<f64> = v.eps.iter().map(|&e| f64::from(e)).collect();
        let dec = nodal_count(&g, m, &x, conv, &cfg.exact)?;
        let bound = group.index_k + idx + f;
        let status = if dec.size <= bound {
            BoundStatus::Holds
        } else if dec.certified_minimal {
            BoundStatus::Violated
        } else {
            BoundStatus::Indeterminate
        };
        let partition_error = if v.partition.is_empty() {
            None
        } else {
            validate_decomposition(&g, m, &x, conv, &all, &v.partition).err()
        };
        checks.push(VectorCheck {
            s: idx + 1,
            norm_error: (norm(&v.phi) - 1.0).abs(),
            max_overlap,
            residual: m.residual(group.lambda, &v.phi),
            sign_conflicts,
            n_value: dec.size,
            exact_n: dec.certified_minimal,
            bound,
            status,
            partition_error,
            partition_size: v.partition.len(),
        });
    }
    let all_pass = checks.iter().all(|c| c.passes(cfg));
    Ok(ValidationReport { complete: checks.len() == group.multiplicity_r, vectors: checks, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{analyze_eigenspace, construct_signed_basis, ConstructionConfig, StructureConfig};
    use crate::fixtures::example16;
    use crate::spectral::{eigendecompose, group_eigenvalues, DEFAULT_GROUP_TOL};

    fn example() -> (DenseSymmetricMatrix, EigenGroup, SignedBasisResult) {
        let m = example16();
        let spec = eigendecompose(&m).unwrap();
        let group =
            group_eigenvalues(&spec, DEFAULT_GROUP_TOL).into_iter().find(|g| g.lambda.abs() < 1e-8).unwrap();
        let st = analyze_eigenspace(&m, &group, &StructureConfig::default()).unwrap();
        let res = construct_signed_basis(&m, &group, &st, &ConstructionConfig::default()).unwrap();
        (m, group, res)
    }

    #[test]
    fn constructed_basis_validates() {
        let (m, group, res) = example();
        let rep = validate_signed_basis(&m, &group, &res, res.f, &ValidationConfig::default()).unwrap();
        assert!(rep.complete && rep.all_pass, "{rep:?}");
    }

    #[test]
    fn flipped_sign_is_reported() {
        let (m, group, mut res) = example();
        let i = (0..16).find(|&i| res.vectors[0].phi[i].abs() > 1e-3).unwrap();
        res.vectors[0].eps[i] = -res.vectors[0].eps[i];
        let rep = validate_signed_basis(&m, &group, &res, res.f, &ValidationConfig::default()).unwrap();
        assert_eq!(rep.vectors[0].sign_conflicts, vec![i]);
        assert!(!rep.all_pass);
    }
}
