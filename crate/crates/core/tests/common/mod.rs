//! Brute-force oracles and random instance generators shared by the
//! integration tests. Nothing here calls the solvers under test.
#![allow(dead_code)]

use nodalkit_core::graph::DEFAULT_ZERO_TOL;
use nodalkit_core::nodal::SignConvention;
use nodalkit_core::{DenseSymmetricMatrix, SignedGraph};
use rand::Rng;

/// Minimum frustrated-edge count over all `2^(n-1)` states with `eps_0 = +1`.
pub fn brute_frustration(m: &DenseSymmetricMatrix) -> usize {
    let n = m.n();
    let mut best = usize::MAX;
    for mask in 0u32..(1 << (n - 1)) {
        let eps = |i: usize| if i == 0 { 1.0 } else if mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 };
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                // sigma = -sgn(M); frustrated when sigma eps_i eps_j < 0, i.e. M eps eps > 0.
                if m.get(i, j).abs() > DEFAULT_ZERO_TOL && m.get(i, j) * eps(i) * eps(j) > 0.0 {
                    count += 1;
                }
            }
        }
        best = best.min(count);
    }
    best
}

fn is_good(conv: SignConvention, v: f64) -> bool {
    match conv {
        SignConvention::LaplacianLike => v < 0.0,
        SignConvention::AdjacencyLike => v > 0.0,
    }
}

fn part_ok(m: &DenseSymmetricMatrix, x: &[f64], conv: SignConvention, part: &[usize]) -> bool {
    // Every induced edge good, and connected through (good) edges.
    for (a, &u) in part.iter().enumerate() {
        for &v in &part[a + 1..] {
            let e = m.get(u, v);
            if e.abs() > DEFAULT_ZERO_TOL && !is_good(conv, e * x[u] * x[v]) {
                return false;
            }
        }
    }
    let mut seen = vec![false; part.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for b in 0..part.len() {
            if !seen[b] && m.get(part[a], part[b]).abs() > DEFAULT_ZERO_TOL {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Minimum number of nodal parts over every set partition of `vertices`
/// (restricted-growth enumeration, Bell-number many).
pub fn brute_nodal(m: &DenseSymmetricMatrix, x: &[f64], conv: SignConvention, vertices: &[usize]) -> usize {
    let k = vertices.len();
    let mut label = vec![0usize; k];
    let mut best = usize::MAX;
    fn rec(
        i: usize,
        used: usize,
        label: &mut Vec<usize>,
        best: &mut usize,
        check: &dyn Fn(&[usize], usize) -> bool,
    ) {
        if used >= *best {
            return;
        }
        if i == label.len() {
            if check(label, used) {
                *best = used;
            }
            return;
        }
        for l in 0..=used {
            label[i] = l;
            rec(i + 1, used.max(l + 1), label, best, check);
        }
    }
    let check = |label: &[usize], parts: usize| {
        (0..parts).all(|p| {
            let part: Vec<usize> = (0..k).filter(|&i| label[i] == p).map(|i| vertices[i]).collect();
            part_ok(m, x, conv, &part)
        })
    };
    if k == 0 {
        return 0;
    }
    label[0] = 0;
    rec(1, 1, &mut label, &mut best, &check);
    best
}

pub fn brute_clique(a: &DenseSymmetricMatrix, phi: &[f64], k: usize) -> bool {
    let s = a.n();
    (0u32..1 << s).filter(|m| m.count_ones() as usize == k).any(|mask| {
        let v: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
        v.iter().all(|&x| v.iter().all(|&y| x == y || a.get(x, y) * phi[x] * phi[y] > 0.0))
    })
}

pub fn connected(m: &DenseSymmetricMatrix) -> bool {
    let g = SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL).unwrap();
    g.require_connected().is_ok()
}

/// Irreducible symmetric matrix with entries in `-3..=3`.
pub fn random_integer_matrix<R: Rng>(rng: &mut R, n: usize) -> DenseSymmetricMatrix {
    loop {
        let density = rng.random_range(0.3..0.9);
        let m = DenseSymmetricMatrix::from_fn(n, |i, j| {
            if i == j {
                rng.random_range(-3..=3) as f64
            } else if rng.random_bool(density) {
                let v = rng.random_range(1..=3) as f64;
                if rng.random_bool(0.5) { v } else { -v }
            } else {
                0.0
            }
        });
        if connected(&m) {
            return m;
        }
    }
}

/// Random weighted tree: uniform parent choice, relabeled, with real weights.
pub fn random_tree_matrix<R: Rng>(rng: &mut R, n: usize) -> DenseSymmetricMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut m = DenseSymmetricMatrix::zeros(n);
    for v in 1..n {
        let p = rng.random_range(0..v);
        let w = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        m.set(perm[v], perm[p], w);
    }
    for i in 0..n {
        m.set(i, i, rng.random_range(-2.0..2.0));
    }
    m
}

/// True when no entry is below `rel * |x|_inf`.
pub fn clearly_nonvanishing(x: &[f64], rel: f64) -> bool {
    let top = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    x.iter().all(|v| v.abs() > rel * top)
}
