//! Greedy BFS part-growing decomposition.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{require_nonvanishing, NodalDecomposition, Problem, SignConvention};
use crate::error::Result;
use crate::graph::SignedGraph;
use crate::matrix::DenseSymmetricMatrix;

/// Valid (not necessarily minimal) decomposition of all vertices; the start
/// order is a seeded shuffle.
pub fn minimal_nodal_decomposition_heuristic(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    conv: SignConvention,
    seed: u64,
) -> Result<NodalDecomposition> {
    let all: Vec<usize> = (0..g.n()).collect();
    require_nonvanishing(x, &all)?;
    Ok(greedy(&Problem::new(g, m, x, conv, &all, false), seed))
}

/// Tracks, for a part under construction, how many members are bad-adjacent
/// to each vertex.
struct Grower {
    in_part: Vec<bool>,
    conflicts: Vec<u32>,
    touched: Vec<usize>,
}

impl Grower {
    fn new(n: usize) -> Self {
        Self { in_part: vec![false; n], conflicts: vec![0; n], touched: Vec::new() }
    }

    fn add(&mut self, p: &Problem, v: usize) {
        self.in_part[v] = true;
        self.touched.push(v);
        for &w in &p.bad[v] {
            self.conflicts[w] += 1;
            self.touched.push(w);
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.in_part[v] = false;
            self.conflicts[v] = 0;
        }
        self.touched.clear();
    }

    /// BFS from `seed_part` over good edges, admitting vertices allowed by
    /// `free` that have no bad edge into the part.
    fn grow(&mut self, p: &Problem, seed_part: &[usize], free: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut part: Vec<usize> = Vec::new();
        for &v in seed_part {
            self.add(p, v);
            part.push(v);
        }
        let mut head = 0;
        while head < part.len() {
            let u = part[head];
            head += 1;
            for &w in &p.good[u] {
                if !self.in_part[w] && self.conflicts[w] == 0 && free(w) {
                    self.add(p, w);
                    part.push(w);
                }
            }
        }
        part
    }
}

pub(crate) fn greedy(p: &Problem, seed: u64) -> NodalDecomposition {
    let n = p.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assigned = vec![false; n];
    let mut grower = Grower::new(n);
    let mut parts = Vec::new();
    for &v in &order {
        if assigned[v] {
            continue;
        }
        let part = grower.grow(p, &[v], |w| !assigned[w]);
        grower.reset();
        for &w in &part {
            assigned[w] = true;
        }
        parts.push(part);
    }
    p.to_global(parts, false)
}

/// Largest nodal part found by the greedy decomposition followed by a growth
/// pass that lets each part absorb compatible vertices from other parts.
pub fn grow_max_domain(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    conv: SignConvention,
    seed: u64,
) -> Result<usize> {
    let all: Vec<usize> = (0..g.n()).collect();
    require_nonvanishing(x, &all)?;
    let p = Problem::new(g, m, x, conv, &all, false);
    let d = greedy(&p, seed);
    let mut grower = Grower::new(p.len());
    let mut best = d.max_part_size();
    for part in &d.parts {
        let grown = grower.grow(&p, part, |_| true);
        grower.reset();
        best = best.max(grown.len());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DEFAULT_ZERO_TOL;
    use crate::nodal::{minimal_nodal_decomposition_exact, validate_decomposition};
    use rand::Rng;

    #[test]
    fn valid_deterministic_and_above_exact() {
        for seed in 0..30u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 12;
            let m = DenseSymmetricMatrix::from_fn(n, |i, j| {
                if i == j || rng.random::<f64>() < 0.5 { 0.0 } else { [-1.0, 1.0][rng.random_range(0..2)] }
            });
            let g = SignedGraph::from_symmetric_matrix(&m, DEFAULT_ZERO_TOL).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let conv = SignConvention::LaplacianLike;
            let h = minimal_nodal_decomposition_heuristic(&g, &m, &x, conv, seed).unwrap();
            assert!(!h.certified_minimal);
            let all: Vec<usize> = (0..n).collect();
            validate_decomposition(&g, &m, &x, conv, &all, &h.parts).unwrap();
            assert_eq!(h, minimal_nodal_decomposition_heuristic(&g, &m, &x, conv, seed).unwrap());
            let e = minimal_nodal_decomposition_exact(&g, &m, &x, conv).unwrap();
            assert!(h.size >= e.size);
            assert!(grow_max_domain(&g, &m, &x, conv, seed).unwrap() >= h.max_part_size());
        }
    }

    #[test]
    fn all_good_connected_is_one_part() {
        let m = DenseSymmetricMatrix::from_fn(6, |i, j| if i != j { -1.0 } else { 0.0 });
        let g = SignedGraph::from_symmetric_matrix(&m, DEFAULT_ZERO_TOL).unwrap();
        let d = minimal_nodal_decomposition_heuristic(&g, &m, &[1.0; 6], SignConvention::LaplacianLike, 9).unwrap();
        assert_eq!(d.size, 1);
    }
}
