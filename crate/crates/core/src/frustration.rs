//! Frustration index: exact branch-and-bound and a local-search heuristic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NodalError, Result};
use crate::graph::{SignedGraph, StateVector};

/// Largest vertex count accepted by the exact solver by default.
pub const DEFAULT_FRUSTRATION_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrustrationResult {
    pub f: usize,
    pub witness: StateVector,
    pub exact: bool,
}

/// Exact frustration index with the default vertex cap.
pub fn frustration_index_exact(g: &SignedGraph) -> Result<FrustrationResult> {
    frustration_index_exact_capped(g, DEFAULT_FRUSTRATION_CAP)
}

/// Exact frustration index by branch-and-bound in vertex order with `eps(0) = +1`.
///
/// Among optimal states the one explored first is returned; `+1` is tried
/// before `-1`, so ties resolve to the lexicographically smallest state under
/// the encoding `+1 -> 0`, `-1 -> 1`.
pub fn frustration_index_exact_capped(g: &SignedGraph, cap: usize) -> Result<FrustrationResult> {
    let n = g.n();
    if n > cap {
        return Err(NodalError::ExceedsCap { n, cap });
    }
    if n == 0 {
        return Ok(FrustrationResult { f: 0, witness: StateVector::ones(0), exact: true });
    }
    let seed = frustration_index_heuristic(g, 0, 8);
    let mut search = Search {
        g,
        assign: vec![0; n],
        cost: [vec![0; n], vec![0; n]],
        best: seed.f + 1,
        best_state: seed.witness.values().to_vec(),
    };
    search.descend(0, 0);
    Ok(FrustrationResult {
        f: search.best,
        witness: StateVector::new(search.best_state).expect("search assigns only +-1"),
        exact: true,
    })
}

struct Search<'a> {
    g: &'a SignedGraph,
    assign: Vec<i8>,
    /// `cost[0][u]` / `cost[1][u]`: frustrated edges from `u` to assigned
    /// vertices if `u` took `+1` / `-1`.
    cost: [Vec<usize>; 2],
    best: usize,
    best_state: Vec<i8>,
}

impl Search<'_> {
    fn bound(&self, v: usize, cur: usize) -> usize {
        cur + (v..self.g.n()).map(|u| self.cost[0][u].min(self.cost[1][u])).sum::<usize>()
    }

    fn descend(&mut self, v: usize, cur: usize) {
        let n = self.g.n();
        if v == n {
            if cur < self.best {
                self.best = cur;
                self.best_state = self.assign.clone();
            }
            return;
        }
        let choices: &[i8] = if v == 0 { &[1] } else { &[1, -1] };
        for &s in choices {
            let slot = usize::from(s < 0);
            let next = cur + self.cost[slot][v];
            self.assign[v] = s;
            self.apply(v, s, true);
            if self.bound(v + 1, next) < self.best {
                self.descend(v + 1, next);
            }
            self.apply(v, s, false);
            self.assign[v] = 0;
        }
    }

    fn apply(&mut self, v: usize, s: i8, add: bool) {
        for &(u, sign) in self.g.neighbors(v) {
            if u <= v {
                continue;
            }
            // u = +1 is frustrated iff sign * s < 0; u = -1 iff sign * s > 0.
            let slot = if sign * s < 0 { 0 } else { 1 };
            if add {
                self.cost[slot][u] += 1;
            } else {
                self.cost[slot][u] -= 1;
            }
        }
    }
}

/// Upper bound from single-vertex-flip local search with random restarts.
///
/// Deterministic for a fixed `(g, seed, restarts)`; the witness is normalized
/// so that `eps(0) = +1`.
pub fn frustration_index_heuristic(g: &SignedGraph, seed: u64, restarts: usize) -> FrustrationResult {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Vec<i8>)> = None;
    for r in 0..restarts.max(1) {
        let mut eps: Vec<i8> = if r == 0 {
            vec![1; n]
        } else {
            (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
        };
        local_search(g, &mut eps);
        let f = count(g, &eps);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, eps));
        }
    }
    let (f, mut eps) = best.unwrap_or((0, Vec::new()));
    if eps.first() == Some(&-1) {
        eps.iter_mut().for_each(|e| *e = -*e);
    }
    FrustrationResult { f, witness: StateVector::new(eps).expect("+-1 entries"), exact: false }
}

fn count(g: &SignedGraph, eps: &[i8]) -> usize {
    g.edges().iter().filter(|e| e.sign * eps[e.i] * eps[e.j] < 0).count()
}

fn local_search(g: &SignedGraph, eps: &mut [i8]) {
    loop {
        let mut improved = false;
        for v in 0..g.n() {
            let mut gain: isize = 0;
            for &(u, s) in g.neighbors(v) {
                gain += if s * eps[v] * eps[u] < 0 { 1 } else { -1 };
            }
            if gain > 0 {
                eps[v] = -eps[v];
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SignedEdge;

    fn e(i: usize, j: usize, sign: i8) -> SignedEdge {
        SignedEdge { i, j, sign }
    }

    /// Enumerates all `2^(n-1)` states with `eps(0) = +1`.
    fn brute(g: &SignedGraph) -> usize {
        let n = g.n();
        (0u64..1 << (n - 1))
            .map(|bits| {
                let eps: Vec<i8> = (0..n)
                    .map(|v| if v > 0 && bits >> (v - 1) & 1 == 1 { -1 } else { 1 })
                    .collect();
                count(g, &eps)
            })
            .min()
            .unwrap()
    }

    #[test]
    fn unbalanced_triangle_has_f_one() {
        let g = SignedGraph::from_edges(3, &[e(0, 1, 1), e(1, 2, 1), e(0, 2, -1)]).unwrap();
        assert_eq!(brute(&g), 1);
        let r = frustration_index_exact(&g).unwrap();
        assert_eq!(r.f, 1);
        assert_eq!(g.frustrated_edge_count(&r.witness).unwrap(), 1);
        // +1 branches first: (+,+,+) already attains the optimum.
        assert_eq!(r.witness.values(), &[1, 1, 1]);
    }

    #[test]
    fn balanced_graph_witness_is_switching_state() {
        let g = SignedGraph::from_edges(4, &[e(0, 1, -1), e(1, 2, 1), e(2, 3, -1), e(0, 3, 1)]).unwrap();
        let r = frustration_index_exact(&g).unwrap();
        assert_eq!(r.f, 0);
        assert_eq!(r.witness.values(), &[1, -1, -1, 1]);
        assert_eq!(frustration_index_heuristic(&g, 3, 4).f, 0);
    }

    #[test]
    fn refuses_above_cap() {
        let g = SignedGraph::from_edges(5, &[]).unwrap();
        assert_eq!(
            frustration_index_exact_capped(&g, 4).unwrap_err(),
            NodalError::ExceedsCap { n: 5, cap: 4 }
        );
    }

    #[test]
    fn heuristic_is_deterministic() {
        let edges: Vec<_> = (0..9).flat_map(|i| ((i + 1)..9).map(move |j| e(i, j, if (i * j) % 3 == 0 { -1 } else { 1 }))).collect();
        let g = SignedGraph::from_edges(9, &edges).unwrap();
        assert_eq!(frustration_index_heuristic(&g, 11, 5), frustration_index_heuristic(&g, 11, 5));
        assert!(frustration_index_heuristic(&g, 11, 5).f >= frustration_index_exact(&g).unwrap().f);
        assert_eq!(frustration_index_exact(&g).unwrap().f, brute(&g));
    }
}
