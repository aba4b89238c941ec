//! Orthonormal eigenbasis with `N^s(phi_l) <= k + (l-1) + f`.

use serde::{Deserialize, Serialize};

use crate::error::{NodalError, Result};
use crate::frustration::{frustration_index_exact, frustration_index_heuristic, DEFAULT_FRUSTRATION_CAP};
use crate::graph::{SignedGraph, DEFAULT_ZERO_TOL};
use crate::linalg::{dot, max_abs, normalize, nullspace, orthonormal_complement};
use crate::matrix::DenseSymmetricMatrix;
use crate::nodal::{restricted_support_decomposition, support_nodal_count, ExactConfig, SignConvention};
use crate::spectral::{lower_eigenvectors, EigenGroup, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct StrongBasisConfig {
    /// Relative threshold (times `|phi|_inf`) below which an entry is zero.
    pub zero_tol: f64,
    pub exact: ExactConfig,
    /// Look for a sparsest admissible vector before falling back to the
    /// decomposition argument.
    pub min_support_search: bool,
    /// Maximum number of candidate supports examined per vector.
    pub search_budget: usize,
}

impl Default for StrongBasisConfig {
    fn default() -> Self {
        Self { zero_tol: 1e-9, exact: ExactConfig::default(), min_support_search: true, search_budget: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongVector {
    pub phi: Vec<f64>,
    pub support: Vec<usize>,
    #[serde(rename = "Ns")]
    pub ns: usize,
    pub bound: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongBasisResult {
    pub eigenvalue: f64,
    pub k: usize,
    pub r: usize,
    pub f: usize,
    pub vectors: Vec<StrongVector>,
}

impl StrongBasisResult {
    pub fn bounds_hold(&self) -> bool {
        self.vectors.iter().all(|v| v.ns <= v.bound)
    }
}

fn support_of(x: &[f64], rel: f64) -> Vec<usize> {
    let cut = rel * max_abs(x);
    (0..x.len()).filter(|&i| x[i].abs() > cut).collect()
}

/// Builds the basis inductively in the switched frame where the positive
/// off-diagonal pairs number exactly `f`.
pub fn construct_strong_support_basis(
    m: &DenseSymmetricMatrix,
    spec: &Spectrum,
    group: &EigenGroup,
    cfg: &StrongBasisConfig,
) -> Result<StrongBasisResult> {
    let g = SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL)?;
    g.require_connected()?;
    let n = m.n();
    let fr = if n <= DEFAULT_FRUSTRATION_CAP { frustration_index_exact(&g)? } else { frustration_index_heuristic(&g, 0, 16) };
    let d = fr.witness.as_f64();
    let flip = |v: &[f64]| -> Vec<f64> { v.iter().zip(&d).map(|(a, b)| a * b).collect() };
    let m_sw = m.switched(&fr.witness)?;
    let g_sw = SignedGraph::from_symmetric_matrix(&m_sw, DEFAULT_ZERO_TOL)?;
    let basis: Vec<Vec<f64>> = group.basis.iter().map(|b| flip(b)).collect();
    let lower: Vec<Vec<f64>> = lower_eigenvectors(spec, group).iter().map(|b| flip(b)).collect();
    let (k, r) = (group.index_k, group.multiplicity_r);

    let mut built: Vec<Vec<f64>> = Vec::with_capacity(r);
    for ell in 0..r {
        let bound = k + ell + fr.f;
        let found = if cfg.min_support_search { sparsest(&basis, &built, bound, cfg) } else { None };
        let phi = match found {
            Some(v) => v,
            None => {
                let start = orthonormal_complement(&basis, &built, 1e-8).into_iter().next().ok_or_else(|| {
                    NodalError::Numerical(format!("no eigenvector left orthogonal to {} built vectors", built.len()))
                })?;
                reduce(&g_sw, &m_sw, group.lambda, &start, &built, &lower, bound, fr.f, k + ell, cfg)?
            }
        };
        built.push(phi);
    }

    let mut vectors = Vec::with_capacity(r);
    for (ell, phi_sw) in built.iter().enumerate() {
        let phi = flip(phi_sw);
        let tol = cfg.zero_tol * max_abs(&phi);
        let dec = support_nodal_count(&g, m, &phi, SignConvention::LaplacianLike, tol)?;
        vectors.push(StrongVector {
            support: support_of(&phi, cfg.zero_tol),
            phi,
            ns: dec.size,
            bound: k + ell + fr.f,
            certified: dec.certified_minimal && fr.exact,
        });
    }
    Ok(StrongBasisResult { eigenvalue: group.lambda, k, r, f: fr.f, vectors })
}

/// Unit eigenvector orthogonal to `built` whose support has at most `bound`
/// vertices, found by scanning supports in order of size.
fn sparsest(basis: &[Vec<f64>], built: &[Vec<f64>], bound: usize, cfg: &StrongBasisConfig) -> Option<Vec<f64>> {
    let n = basis.first()?.len();
    let r = basis.len();
    // Vertices where the eigenspace does not vanish identically.
    let live: Vec<usize> = (0..n).filter(|&i| basis.iter().any(|b| b[i].abs() > 1e-9)).collect();
    let built_coords: Vec<Vec<f64>> =
        built.iter().map(|v| basis.iter().map(|b| dot(b, v)).collect()).collect();
    let mut budget = cfg.search_budget;
    for size in 1..=bound.min(live.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            if budget == 0 {
                return None;
            }
            budget -= 1;
            let mut inside = vec![false; n];
            for &a in &idx {
                inside[live[a]] = true;
            }
            let mut rows: Vec<Vec<f64>> =
                (0..n).filter(|&i| !inside[i]).map(|i| basis.iter().map(|b| b[i]).collect()).collect();
            rows.extend(built_coords.iter().cloned());
            if let Some(c) = nullspace(&rows, r, 1e-12).into_iter().next() {
                let mut x = vec![0.0; n];
                for (cj, b) in c.iter().zip(basis) {
                    for i in 0..n {
                        x[i] += cj * b[i];
                    }
                }
                for i in 0..n {
                    if !inside[i] {
                        x[i] = 0.0;
                    }
                }
                if normalize(&mut x) > 1e-12 {
                    return Some(x);
                }
            }
            if !next_combination(&mut idx, live.len()) {
                break;
            }
        }
    }
    None
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for pos in (0..k).rev() {
        if idx[pos] < n - k + pos {
            idx[pos] += 1;
            for q in pos + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// One inductive step: restrict `phi` to a decomposition of its support that
/// never joins a positive pair, then kill enough parts while staying in the
/// eigenspace and orthogonal to what is built.
#[allow(clippy::too_many_arguments)]
fn reduce(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    lambda: f64,
    phi: &[f64],
    built: &[Vec<f64>],
    lower: &[Vec<f64>],
    bound: usize,
    f: usize,
    k_plus_ell: usize,
    cfg: &StrongBasisConfig,
) -> Result<Vec<f64>> {
    let n = phi.len();
    let tol = cfg.zero_tol * max_abs(phi);
    let mut phi = phi.to_vec();
    for v in phi.iter_mut() {
        if v.abs() <= tol {
            *v = 0.0;
        }
    }
    let dec = restricted_support_decomposition(g, m, &phi, 0.0, &cfg.exact);
    let t = dec.size;
    if t <= bound {
        return Ok(phi);
    }
    let mut part_of = vec![usize::MAX; n];
    for (p, part) in dec.parts.iter().enumerate() {
        for &i in part {
            part_of[i] = p;
        }
    }
    let pieces: Vec<Vec<f64>> = dec
        .parts
        .iter()
        .map(|part| {
            let mut x = vec![0.0; n];
            for &i in part {
                x[i] = phi[i];
            }
            x
        })
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for e in g.edges() {
        let (p, q) = (part_of[e.i], part_of[e.j]);
        if m.get(e.i, e.j) > 0.0 && p != usize::MAX && q != usize::MAX && p != q {
            let mut row = vec![0.0; t];
            row[p] = 1.0;
            row[q] = -1.0;
            rows.push(row);
        }
    }
    for b in built.iter().chain(lower) {
        rows.push(pieces.iter().map(|x| dot(x, b)).collect());
    }
    for p in 0..t - f - k_plus_ell {
        let mut row = vec![0.0; t];
        row[p] = 1.0;
        rows.push(row);
    }
    let alpha = nullspace(&rows, t, 1e-12).into_iter().next().ok_or_else(|| {
        NodalError::Numerical(format!("restricted subspace is empty ({t} parts, bound {bound})"))
    })?;
    let top = max_abs(&alpha);
    let mut x = vec![0.0; n];
    for (a, piece) in alpha.iter().zip(&pieces) {
        if a.abs() > 1e-10 * top {
            for i in 0..n {
                x[i] += a * piece[i];
            }
        }
    }
    normalize(&mut x);
    let res = m.residual(lambda, &x);
    if res > 1e-8 {
        return Err(NodalError::Numerical(format!("reduced vector has eigen-residual {res:.3e}")));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example16, star_laplacian};
    use crate::spectral::{eigendecompose, group_eigenvalues, DEFAULT_GROUP_TOL};

    fn run(m: &DenseSymmetricMatrix, lambda: f64, cfg: &StrongBasisConfig) -> StrongBasisResult {
        let spec = eigendecompose(m).unwrap();
        let group = group_eigenvalues(&spec, DEFAULT_GROUP_TOL)
            .into_iter()
            .find(|g| (g.lambda - lambda).abs() < 1e-8)
            .unwrap();
        construct_strong_support_basis(m, &spec, &group, cfg).unwrap()
    }

    fn check_orthonormal(res: &StrongBasisResult) {
        for (a, u) in res.vectors.iter().enumerate() {
            for (b, v) in res.vectors.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot(&u.phi, &v.phi) - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn star_sparsest_supports() {
        let res = run(&star_laplacian(5), 1.0, &StrongBasisConfig::default());
        check_orthonormal(&res);
        let sizes: Vec<usize> = res.vectors.iter().map(|v| v.support.len()).collect();
        assert_eq!(sizes, vec![2, 2, 4]);
        assert!(res.bounds_hold());
    }

    #[test]
    fn decomposition_path_alone() {
        let cfg = StrongBasisConfig { min_support_search: false, ..Default::default() };
        for (m, lambda) in [(star_laplacian(6), 1.0), (example16(), 0.0)] {
            let res = run(&m, lambda, &cfg);
            check_orthonormal(&res);
            assert!(res.bounds_hold(), "{:?}", res.vectors.iter().map(|v| (v.ns, v.bound)).collect::<Vec<_>>());
        }
    }
}
