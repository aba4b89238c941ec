//! Nodal counting: path-domain counts, minimal nodal decompositions (exact and
//! heuristic), support-restricted counts and bound verification.

mod bounds;
mod exact;
mod heuristic;

use serde::{Deserialize, Serialize};

pub use bounds::{inertia_check, inertia_counts, verify_generic_bounds, BoundContext, BoundReport, InertiaCounts};
pub use exact::{minimal_nodal_decomposition_exact, minimal_nodal_decomposition_exact_with, ExactConfig};
pub use heuristic::{grow_max_domain, minimal_nodal_decomposition_heuristic};

use crate::error::{NodalError, Result};
use crate::graph::SignedGraph;
use crate::matrix::DenseSymmetricMatrix;

/// Which sign of `M_ij x_i x_j` makes an edge good.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Good when `M_ij x_i x_j < 0`.
    #[default]
    LaplacianLike,
    /// Good when `M_ij x_i x_j > 0`.
    AdjacencyLike,
}

impl SignConvention {
    #[inline]
    pub fn is_good(self, product: f64) -> bool {
        match self {
            SignConvention::LaplacianLike => product < 0.0,
            SignConvention::AdjacencyLike => product > 0.0,
        }
    }
}

/// Component counts of `G^<`, `G^<=`, `G^>`, `G^>=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDomainCounts {
    pub kappa_lt: usize,
    pub kappa_le: usize,
    pub kappa_gt: usize,
    pub kappa_ge: usize,
}

/// A partition of the analyzed vertices into nodal parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodalDecomposition {
    /// Sorted parts, ordered by smallest vertex.
    pub parts: Vec<Vec<usize>>,
    pub size: usize,
    pub certified_minimal: bool,
}

impl NodalDecomposition {
    pub(crate) fn new(mut parts: Vec<Vec<usize>>, certified_minimal: bool) -> Self {
        for p in parts.iter_mut() {
            p.sort_unstable();
        }
        parts.sort_by_key(|p| p[0]);
        let size = parts.len();
        Self { parts, size, certified_minimal }
    }

    pub fn max_part_size(&self) -> usize {
        self.parts.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Good/bad adjacency of `G[vertices]` for a fixed vector, in local indices.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    /// Global id of each local vertex (ascending).
    pub vertices: Vec<usize>,
    pub good: Vec<Vec<usize>>,
    pub bad: Vec<Vec<usize>>,
}

impl Problem {
    /// Builds the good/bad structure. With `forbid_positive`, any edge with
    /// `M_ij > 0` is bad regardless of the vector.
    pub fn new(
        g: &SignedGraph,
        m: &DenseSymmetricMatrix,
        x: &[f64],
        conv: SignConvention,
        vertices: &[usize],
        forbid_positive: bool,
    ) -> Self {
        let mut local = vec![usize::MAX; g.n()];
        let mut verts = vertices.to_vec();
        verts.sort_unstable();
        verts.dedup();
        for (a, &v) in verts.iter().enumerate() {
            local[v] = a;
        }
        let mut good = vec![Vec::new(); verts.len()];
        let mut bad = vec![Vec::new(); verts.len()];
        for (a, &v) in verts.iter().enumerate() {
            for &(w, _) in g.neighbors(v) {
                let b = local[w];
                if b == usize::MAX {
                    continue;
                }
                let mij = m.get(v, w);
                let ok = conv.is_good(mij * x[v] * x[w]) && !(forbid_positive && mij > 0.0);
                if ok {
                    good[a].push(b);
                } else {
                    bad[a].push(b);
                }
            }
        }
        Self { vertices: verts, good, bad }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn to_global(&self, parts: Vec<Vec<usize>>, certified: bool) -> NodalDecomposition {
        NodalDecomposition::new(
            parts.into_iter().map(|p| p.into_iter().map(|a| self.vertices[a]).collect()).collect(),
            certified,
        )
    }
}

/// Rejects vectors that vanish anywhere on `vertices`.
pub(crate) fn require_nonvanishing(x: &[f64], vertices: &[usize]) -> Result<()> {
    let zeros: Vec<usize> = vertices.iter().copied().filter(|&v| x[v] == 0.0).collect();
    match zeros.first() {
        None => Ok(()),
        Some(&first) => Err(NodalError::Vanishing { count: zeros.len(), first }),
    }
}

/// Checks that `parts` partitions `vertices` into connected parts whose
/// internal edges are all good. Returns a description of the first failure.
pub fn validate_decomposition(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    conv: SignConvention,
    vertices: &[usize],
    parts: &[Vec<usize>],
) -> std::result::Result<(), String> {
    let mut owner = vec![usize::MAX; g.n()];
    for (pi, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(format!("part {pi} is empty"));
        }
        for &v in part {
            if v >= g.n() {
                return Err(format!("vertex {v} out of range"));
            }
            if owner[v] != usize::MAX {
                return Err(format!("vertex {v} appears in two parts"));
            }
            owner[v] = pi;
        }
    }
    let mut expected: Vec<usize> = vertices.to_vec();
    expected.sort_unstable();
    expected.dedup();
    let covered: usize = parts.iter().map(Vec::len).sum();
    if covered != expected.len() || expected.iter().any(|&v| owner[v] == usize::MAX) {
        return Err("parts do not cover the analyzed vertex set exactly".into());
    }
    for (pi, part) in parts.iter().enumerate() {
        for &v in part {
            for &(w, _) in g.neighbors(v) {
                if owner[w] == pi && v < w && !conv.is_good(m.get(v, w) * x[v] * x[w]) {
                    return Err(format!("edge ({v},{w}) inside part {pi} is not good"));
                }
            }
        }
        if g.connected_components(part).len() != 1 {
            return Err(format!("part {pi} is not connected"));
        }
    }
    Ok(())
}

/// Component counts of the four path-domain graphs. Entries with
/// `|x| <= zero_tol` are zeros.
///
/// The graphs are defined by the raw sign of `M_ij x_i x_j`, so `conv` does not
/// change them; under the adjacency convention the good-edge graph is `G^>`.
pub fn path_domain_counts(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    _conv: SignConvention,
    zero_tol: f64,
) -> PathDomainCounts {
    let xs: Vec<f64> = x.iter().map(|&v| if v.abs() <= zero_tol { 0.0 } else { v }).collect();
    let prod = |i: usize, j: usize| m.get(i, j) * xs[i] * xs[j];
    let all: Vec<usize> = (0..g.n()).collect();
    let support: Vec<usize> = all.iter().copied().filter(|&i| xs[i] != 0.0).collect();
    PathDomainCounts {
        kappa_lt: g.components_where(&all, |i, j, _| prod(i, j) < 0.0).len(),
        kappa_le: g.components_where(&support, |i, j, _| prod(i, j) <= 0.0).len(),
        kappa_gt: g.components_where(&all, |i, j, _| prod(i, j) > 0.0).len(),
        kappa_ge: g.components_where(&support, |i, j, _| prod(i, j) >= 0.0).len(),
    }
}

/// Exact (or, above the cap, heuristic) `N` of `x` restricted to its support.
pub fn support_nodal_count(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    conv: SignConvention,
    zero_tol: f64,
) -> Result<NodalDecomposition> {
    let support: Vec<usize> = (0..g.n()).filter(|&i| x[i].abs() > zero_tol).collect();
    if support.is_empty() {
        return Err(NodalError::InvalidInput("vector has empty support".into()));
    }
    nodal_count_on(g, m, x, conv, &support, &ExactConfig::default())
}

/// `N` of `x` on `vertices`: exact when the set fits the cap, heuristic otherwise.
pub fn nodal_count_on(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    conv: SignConvention,
    vertices: &[usize],
    cfg: &ExactConfig,
) -> Result<NodalDecomposition> {
    require_nonvanishing(x, vertices)?;
    let p = Problem::new(g, m, x, conv, vertices, false);
    if p.len() <= cfg.cap {
        Ok(exact::solve_problem(&p, cfg))
    } else {
        Ok(heuristic::greedy(&p, 0))
    }
}

/// `N` over all vertices, exact when `n <= cfg.cap`.
pub fn nodal_count(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    conv: SignConvention,
    cfg: &ExactConfig,
) -> Result<NodalDecomposition> {
    let all: Vec<usize> = (0..g.n()).collect();
    nodal_count_on(g, m, x, conv, &all, cfg)
}

/// Exact minimal decomposition of the support of `x` in which parts never
/// contain a pair with `M_ij > 0` (used by the strong-support basis).
pub(crate) fn restricted_support_decomposition(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    zero_tol: f64,
    cfg: &ExactConfig,
) -> NodalDecomposition {
    let support: Vec<usize> = (0..g.n()).filter(|&i| x[i].abs() > zero_tol).collect();
    let p = Problem::new(g, m, x, SignConvention::LaplacianLike, &support, true);
    if p.len() <= cfg.cap {
        exact::solve_problem(&p, cfg)
    } else {
        heuristic::greedy(&p, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DEFAULT_ZERO_TOL;

    fn neg_path(n: usize) -> (SignedGraph, DenseSymmetricMatrix) {
        let m = DenseSymmetricMatrix::from_fn(n, |i, j| if j == i + 1 { -1.0 } else { 0.0 });
        (SignedGraph::from_symmetric_matrix(&m, DEFAULT_ZERO_TOL).unwrap(), m)
    }

    #[test]
    fn p3_middle_zero_counts() {
        let (g, m) = neg_path(3);
        let c = path_domain_counts(&g, &m, &[1.0, 0.0, -1.0], SignConvention::LaplacianLike, 1e-12);
        assert_eq!(c.kappa_lt, 3);
        assert_eq!(c.kappa_le, 2);
    }

    #[test]
    fn constant_sign_is_one_domain() {
        let (g, m) = neg_path(5);
        let x = [1.0, 2.0, 1.0, 3.0, 0.5];
        let c = path_domain_counts(&g, &m, &x, SignConvention::LaplacianLike, 1e-12);
        assert_eq!(c.kappa_lt, 1);
        let d = nodal_count(&g, &m, &x, SignConvention::LaplacianLike, &ExactConfig::default()).unwrap();
        assert_eq!((d.size, d.certified_minimal), (1, true));
    }

    #[test]
    fn adjacency_convention_counts_positive_products() {
        // Path 0-1-2 with A01 = +1, A12 = -1 and its zero-eigenvalue vector.
        let m = DenseSymmetricMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, -1.0],
            vec![0.0, -1.0, 0.0],
        ])
        .unwrap();
        let g = SignedGraph::from_symmetric_matrix(&m, DEFAULT_ZERO_TOL).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = path_domain_counts(&g, &m, &[s, 0.0, s], SignConvention::AdjacencyLike, 1e-12);
        assert_eq!(c.kappa_gt, 3);
        let c = path_domain_counts(&g, &m, &[1.0, 1.0, -1.0], SignConvention::AdjacencyLike, 1e-12);
        assert_eq!(c.kappa_gt, 1);
    }

    #[test]
    fn star_support_pair() {
        let mut m = DenseSymmetricMatrix::zeros(5);
        for i in 1..5 {
            m.set(0, i, -1.0);
            m.set(i, i, 1.0);
        }
        m.set(0, 0, 4.0);
        let g = SignedGraph::from_symmetric_matrix(&m, DEFAULT_ZERO_TOL).unwrap();
        let d = support_nodal_count(&g, &m, &[0.0, 1.0, -1.0, 0.0, 0.0], SignConvention::LaplacianLike, 1e-12).unwrap();
        assert_eq!(d.size, 2);
        assert_eq!(d.parts, vec![vec![1], vec![2]]);
        assert!(support_nodal_count(&g, &m, &[0.0; 5], SignConvention::LaplacianLike, 1e-12).is_err());
    }

    #[test]
    fn vanishing_vector_is_rejected() {
        let (g, m) = neg_path(3);
        let err = nodal_count(&g, &m, &[1.0, 0.0, 1.0], SignConvention::LaplacianLike, &ExactConfig::default());
        assert_eq!(err.unwrap_err(), NodalError::Vanishing { count: 1, first: 1 });
    }

    #[test]
    fn validator_flags_bad_edge_and_disconnected_part() {
        let (g, m) = neg_path(3);
        let x = [1.0, -1.0, 1.0];
        let all = [0, 1, 2];
        assert!(validate_decomposition(&g, &m, &x, SignConvention::LaplacianLike, &all, &[vec![0], vec![1], vec![2]]).is_ok());
        assert!(validate_decomposition(&g, &m, &x, SignConvention::LaplacianLike, &all, &[vec![0, 1], vec![2]]).is_err());
        assert!(validate_decomposition(&g, &m, &[1.0, -1.0, 1.0], SignConvention::LaplacianLike, &all, &[vec![0, 2], vec![1]]).is_err());
    }
}
