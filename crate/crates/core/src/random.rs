//! Random signed graphs `G(n, p, q)` and the empirical nodal statistics run on
//! their adjacency eigenvectors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NodalError, Result};
use crate::graph::{SignedGraph, DEFAULT_ZERO_TOL};
use crate::matrix::DenseSymmetricMatrix;
use crate::nodal::{grow_max_domain, minimal_nodal_decomposition_heuristic, path_domain_counts, PathDomainCounts, SignConvention};
use crate::rng::{derive_seed, derived_rng};
use crate::spectral::{eigendecompose, Spectrum};

/// Cap on the scan-set size so that `C(s, k)` stays small.
pub const MAX_SCAN_SET: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnpqParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
}

impl GnpqParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(NodalError::InvalidInput("n must be positive".into()));
        }
        if !(self.p > 0.0 && self.q > 0.0 && self.p + self.q <= 1.0 + 1e-12) {
            return Err(NodalError::InvalidInput(format!(
                "need p > 0, q > 0, p + q <= 1 (got p = {}, q = {})",
                self.p, self.q
            )));
        }
        Ok(())
    }

    pub fn p_min(&self) -> f64 {
        self.p.min(self.q)
    }
}

/// Samples `A` with `A_ij = +1` w.p. `p`, `-1` w.p. `q`, else 0. Pair `(i, j)`
/// always reads the same position of the keyed stream, so the result does
/// not depend on iteration order. The graph follows the library convention
/// `sigma_ij = -sgn(A_ij)`.
pub fn sample_gnpq(params: &GnpqParams) -> Result<(SignedGraph, DenseSymmetricMatrix)> {
    params.validate()?;
    let n = params.n;
    let base = derive_seed(params.seed, "gnpq");
    let mut a = DenseSymmetricMatrix::zeros(n);
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    for i in 0..n {
        rng.set_stream(i as u64);
        for j in (i + 1)..n {
            rng.set_word_pos(2 * j as u128);
            let u: f64 = rng.random();
            let v = if u < params.p {
                1.0
            } else if u < params.p + params.q {
                -1.0
            } else {
                0.0
            };
            if v != 0.0 {
                a.set(i, j, v);
            }
        }
    }
    let g = SignedGraph::from_symmetric_matrix(&a, DEFAULT_ZERO_TOL)?;
    Ok((g, a))
}

/// True iff some `k` vertices of the block are pairwise joined by good edges
/// (`A_uv phi_u phi_v > 0`).
pub fn clique_domain_present(a_s: &DenseSymmetricMatrix, phi_s: &[f64], k: usize) -> bool {
    clique_domain_witness(a_s, phi_s, k).is_some()
}

/// Lexicographically smallest good `k`-clique of the block, in local indices.
pub fn clique_domain_witness(a_s: &DenseSymmetricMatrix, phi_s: &[f64], k: usize) -> Option<Vec<usize>> {
    let s = a_s.n();
    if k == 0 {
        return Some(Vec::new());
    }
    let good = |u: usize, v: usize| a_s.get(u, v) * phi_s[u] * phi_s[v] > 0.0;
    let mut stack = Vec::with_capacity(k);
    fn extend(
        stack: &mut Vec<usize>,
        from: usize,
        s: usize,
        k: usize,
        good: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if stack.len() == k {
            return true;
        }
        // Not enough vertices left to finish.
        if s - from < k - stack.len() {
            return false;
        }
        for v in from..s {
            if stack.iter().all(|&u| good(u, v)) {
                stack.push(v);
                if extend(stack, v + 1, s, k, good) {
                    return true;
                }
                stack.pop();
            }
        }
        false
    }
    extend(&mut stack, 0, s, k, &good).then_some(stack)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliqueDomainConfig {
    pub k: usize,
    /// Scan-set size; `None` uses `ceil((p^q)^-k)` capped at `min(n/4, 30)`.
    pub s: Option<usize>,
    /// Consecutive failed scans before stopping; `None` uses `200 n / s`.
    pub budget: Option<usize>,
}

impl Default for CliqueDomainConfig {
    fn default() -> Self {
        Self { k: 2, s: None, budget: None }
    }
}

impl CliqueDomainConfig {
    pub fn scan_size(&self, n: usize, p_min: f64) -> usize {
        let raw = self.s.unwrap_or_else(|| {
            let s = p_min.powi(-(self.k as i32)).ceil();
            let cap = (n / 4).min(MAX_SCAN_SET);
            if s.is_finite() { (s as usize).min(cap) } else { cap }
        });
        raw.max(self.k).min(n.max(self.k))
    }

    pub fn scan_budget(&self, n: usize, s: usize) -> usize {
        self.budget.unwrap_or(200 * n / s.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliquePartition {
    pub domains: Vec<Vec<usize>>,
    pub leftover: usize,
    pub s: usize,
    pub budget: usize,
}

impl CliquePartition {
    /// Removed domains plus one singleton per leftover vertex.
    pub fn count_estimate(&self) -> usize {
        self.domains.len() + self.leftover
    }
}

/// Repeatedly draws `s`-subsets of the remaining vertices and removes the
/// smallest good `k`-clique found, until `budget` consecutive draws fail.
/// Vertices with `|phi| <= zero_tol` never join a clique.
pub fn greedy_clique_partition(
    a: &DenseSymmetricMatrix,
    phi: &[f64],
    p_min: f64,
    cfg: &CliqueDomainConfig,
    zero_tol: f64,
    seed: u64,
) -> CliquePartition {
    let n = a.n();
    let s = cfg.scan_size(n, p_min);
    let budget = cfg.scan_budget(n, s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining: Vec<usize> = (0..n).filter(|&i| phi[i].abs() > zero_tol).collect();
    let mut domains = Vec::new();
    let mut failures = 0;
    while failures < budget && remaining.len() >= cfg.k {
        let exhaustive = remaining.len() <= s;
        let mut pick: Vec<usize> = if exhaustive {
            remaining.clone()
        } else {
            remaining.partial_shuffle(&mut rng, s).0.to_vec()
        };
        pick.sort_unstable();
        let block = a.submatrix(&pick);
        let local: Vec<f64> = pick.iter().map(|&i| phi[i]).collect();
        match clique_domain_witness(&block, &local, cfg.k) {
            Some(w) => {
                let clique: Vec<usize> = w.iter().map(|&l| pick[l]).collect();
                remaining.retain(|v| !clique.contains(v));
                domains.push(clique);
                failures = 0;
            }
            None if exhaustive => break,
            None => failures += 1,
        }
    }
    let covered: usize = domains.iter().map(Vec::len).sum();
    CliquePartition { domains, leftover: n - covered, s, budget }
}

/// `ceil(3 log n / log(1 / (1 - p_min)))`.
pub fn max_domain_bound(n: usize, p_min: f64) -> usize {
    (3.0 * (n as f64).ln() / (1.0 / (1.0 - p_min)).ln()).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxDomainCheck {
    pub max_size: usize,
    pub bound: usize,
    pub ok: bool,
}

/// Largest nodal part found (greedy decomposition plus growth) against the
/// logarithmic bound.
pub fn max_domain_size_bound_check(
    g: &SignedGraph,
    a: &DenseSymmetricMatrix,
    phi: &[f64],
    p_min: f64,
    seed: u64,
) -> Result<MaxDomainCheck> {
    let max_size = grow_max_domain(g, a, phi, SignConvention::AdjacencyLike, seed)?;
    let bound = max_domain_bound(g.n(), p_min);
    Ok(MaxDomainCheck { max_size, bound, ok: max_size <= bound })
}

/// `kappa(G^>) == 1` for each eigenvector.
pub fn path_triviality_scan(g: &SignedGraph, a: &DenseSymmetricMatrix, spec: &Spectrum) -> Vec<bool> {
    spec.eigenvectors
        .iter()
        .map(|x| path_domain_counts(g, a, x, SignConvention::AdjacencyLike, 0.0).kappa_gt == 1)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorStats {
    pub seed: u64,
    pub index: usize,
    pub paths: PathDomainCounts,
    pub n_heuristic: usize,
    pub clique_count: usize,
    pub leftover: usize,
    pub max_size: usize,
    pub bound: usize,
    pub bound_ok: bool,
}

impl EigenvectorStats {
    pub fn path_trivial(&self) -> bool {
        self.paths.kappa_gt == 1
    }
}

/// Statistics for every eigenvector of one `G(n, p, q)` sample.
pub fn eigenvector_stats(params: &GnpqParams, cfg: &CliqueDomainConfig) -> Result<Vec<EigenvectorStats>> {
    let (g, a) = sample_gnpq(params)?;
    let spec = eigendecompose(&a)?;
    let p_min = params.p_min();
    spec.eigenvectors
        .par_iter()
        .enumerate()
        .map(|(idx, x)| {
            let tag = format!("stats/{idx}");
            let paths = path_domain_counts(&g, &a, x, SignConvention::AdjacencyLike, 0.0);
            let heur = minimal_nodal_decomposition_heuristic(&g, &a, x, SignConvention::AdjacencyLike, derive_seed(params.seed, &tag))?;
            let clique = greedy_clique_partition(&a, x, p_min, cfg, 0.0, derive_seed(params.seed, &format!("clique/{idx}")));
            let dom = max_domain_size_bound_check(&g, &a, x, p_min, derive_seed(params.seed, &format!("grow/{idx}")))?;
            Ok(EigenvectorStats {
                seed: params.seed,
                index: idx + 1,
                paths,
                n_heuristic: heur.size,
                clique_count: clique.domains.len(),
                leftover: clique.leftover,
                max_size: dom.max_size,
                bound: dom.bound,
                bound_ok: dom.ok,
            })
        })
        .collect()
}

/// Runs [`eigenvector_stats`] for each seed; records come back ordered by
/// `(seed, index)`.
pub fn run_experiment(
    n: usize,
    p: f64,
    q: f64,
    seeds: &[u64],
    cfg: &CliqueDomainConfig,
) -> Result<Vec<EigenvectorStats>> {
    let per: Vec<Vec<EigenvectorStats>> = seeds
        .par_iter()
        .map(|&seed| eigenvector_stats(&GnpqParams { n, p, q, seed }, cfg))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// A random vector drawn from the stream for `(seed, tag)`.
pub fn random_signs(n: usize, seed: u64, tag: &str) -> Vec<f64> {
    let mut rng = derived_rng(seed, tag);
    (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: &DenseSymmetricMatrix, phi: &[f64], k: usize) -> bool {
        let s = a.n();
        (0u32..1 << s).filter(|m| m.count_ones() as usize == k).any(|mask| {
            let v: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
            v.iter().all(|&x| v.iter().all(|&y| x == y || a.get(x, y) * phi[x] * phi[y] > 0.0))
        })
    }

    #[test]
    fn complete_when_p_plus_q_is_one() {
        let (g, _) = sample_gnpq(&GnpqParams { n: 30, p: 0.4, q: 0.6, seed: 1 }).unwrap();
        assert_eq!(g.edges().len(), 30 * 29 / 2);
    }

    #[test]
    fn sampling_is_deterministic_and_prefix_stable() {
        let a = sample_gnpq(&GnpqParams { n: 40, p: 0.3, q: 0.3, seed: 9 }).unwrap().1;
        let b = sample_gnpq(&GnpqParams { n: 40, p: 0.3, q: 0.3, seed: 9 }).unwrap().1;
        assert_eq!(a, b);
        // Pair (i, j) reads a fixed stream position, so a larger n extends the sample.
        let c = sample_gnpq(&GnpqParams { n: 50, p: 0.3, q: 0.3, seed: 9 }).unwrap().1;
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(a.get(i, j), c.get(i, j));
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        for (n, p, q) in [(0, 0.3, 0.3), (5, 0.0, 0.3), (5, 0.6, 0.6)] {
            assert!(sample_gnpq(&GnpqParams { n, p, q, seed: 0 }).is_err());
        }
    }

    #[test]
    fn clique_oracle_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let s = rng.random_range(2..=9);
            let a = DenseSymmetricMatrix::from_fn(s, |i, j| {
                if i == j { 0.0 } else { [-1.0, 0.0, 1.0][rng.random_range(0..3)] }
            });
            let phi: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
            for k in 2..=4 {
                assert_eq!(clique_domain_present(&a, &phi, k), brute(&a, &phi, k));
            }
        }
    }

    #[test]
    fn greedy_accounting_and_validity() {
        let params = GnpqParams { n: 60, p: 0.3, q: 0.3, seed: 4 };
        let (_, a) = sample_gnpq(&params).unwrap();
        let phi = random_signs(60, 4, "phi");
        for k in [2, 3] {
            let cfg = CliqueDomainConfig { k, ..Default::default() };
            let part = greedy_clique_partition(&a, &phi, 0.3, &cfg, 0.0, 1);
            assert_eq!(part.domains.len() * k + part.leftover, 60);
            let mut seen = vec![false; 60];
            for d in &part.domains {
                for &u in d {
                    assert!(!seen[u]);
                    seen[u] = true;
                    for &v in d {
                        assert!(u == v || a.get(u, v) * phi[u] * phi[v] > 0.0);
                    }
                }
            }
        }
        let none = greedy_clique_partition(&a, &phi, 0.3, &CliqueDomainConfig { budget: Some(0), ..Default::default() }, 0.0, 1);
        assert_eq!((none.domains.len(), none.leftover), (0, 60));
    }

    #[test]
    fn bound_formula() {
        assert_eq!(max_domain_bound(400, 0.3), 51);
    }

    #[test]
    fn planted_clique_is_found() {
        let n = 12;
        let a = DenseSymmetricMatrix::from_fn(n, |i, j| if i != j && i < 5 && j < 5 { 1.0 } else if j == i + 1 { -1.0 } else { 0.0 });
        let g = SignedGraph::from_symmetric_matrix(&a, DEFAULT_ZERO_TOL).unwrap();
        let phi = vec![1.0; n];
        let c = max_domain_size_bound_check(&g, &a, &phi, 0.3, 0).unwrap();
        assert!(c.max_size >= 5);
    }
}
