//! Small matrices with known spectra and forced multiplicities.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::StateVector;
use crate::matrix::DenseSymmetricMatrix;

/// Off-diagonal `+1` pairs of the 16-vertex example (1-based).
const EXAMPLE_POSITIVE: [(usize, usize); 2] = [(6, 9), (15, 16)];
/// Off-diagonal `-1` pairs of the 16-vertex example (1-based).
const EXAMPLE_NEGATIVE: [(usize, usize); 22] = [
    (1, 2),
    (1, 5),
    (2, 5),
    (3, 8),
    (4, 8),
    (5, 6),
    (5, 9),
    (6, 7),
    (6, 11),
    (8, 11),
    (9, 10),
    (9, 13),
    (9, 14),
    (10, 11),
    (10, 12),
    (10, 15),
    (10, 16),
    (11, 12),
    (11, 15),
    (11, 16),
    (12, 15),
    (12, 16),
];
const EXAMPLE_NEG_DIAGONAL: [usize; 6] = [1, 2, 5, 10, 11, 12];

/// The 16-vertex example whose eigenvalue 0 has index 7 and multiplicity 6.
pub fn example16() -> DenseSymmetricMatrix {
    let mut m = DenseSymmetricMatrix::zeros(16);
    for &i in &EXAMPLE_NEG_DIAGONAL {
        m.set(i - 1, i - 1, -1.0);
    }
    for &(i, j) in &EXAMPLE_POSITIVE {
        m.set(i - 1, j - 1, 1.0);
    }
    for &(i, j) in &EXAMPLE_NEGATIVE {
        m.set(i - 1, j - 1, -1.0);
    }
    m
}

/// Per-block orthogonal bases used in the worked example: the two 3-vertex
/// blocks share `{(1,2,-3), (-5,4,1)}` and singletons use `(1)`.
pub fn example16_psi() -> Vec<Vec<Vec<f64>>> {
    let pair = vec![vec![1.0, 2.0, -3.0], vec![-5.0, 4.0, 1.0]];
    let one = vec![vec![1.0]];
    vec![pair.clone(), one.clone(), one.clone(), one.clone(), pair, one.clone(), one]
}

/// Laplacian of the star with hub 0 and `n - 1` leaves.
pub fn star_laplacian(n: usize) -> DenseSymmetricMatrix {
    assert!(n >= 2);
    DenseSymmetricMatrix::from_fn(n, |i, j| match (i, j) {
        (0, 0) => (n - 1) as f64,
        (i, j) if i == j => 1.0,
        (0, _) => -1.0,
        _ => 0.0,
    })
}

/// Negative adjacency matrix of the path.
pub fn neg_path(n: usize) -> DenseSymmetricMatrix {
    DenseSymmetricMatrix::from_fn(n, |i, j| if j == i + 1 { -1.0 } else { 0.0 })
}

/// Laplacian of `K_{a,b}`; eigenvalues `0, a (b-1 times), b (a-1 times), a+b`.
pub fn complete_bipartite_laplacian(a: usize, b: usize) -> DenseSymmetricMatrix {
    let n = a + b;
    DenseSymmetricMatrix::from_fn(n, |i, j| {
        let side = |v: usize| v < a;
        if i == j {
            if side(i) { b as f64 } else { a as f64 }
        } else if side(i) != side(j) {
            -1.0
        } else {
            0.0
        }
    })
}

/// Laplacian of the circulant graph on `n` vertices with the given jumps.
/// Eigenvalues come in conjugate pairs, so most have multiplicity 2.
pub fn circulant_laplacian(n: usize, jumps: &[usize]) -> DenseSymmetricMatrix {
    let mut m = DenseSymmetricMatrix::zeros(n);
    for i in 0..n {
        for &s in jumps {
            let j = (i + s) % n;
            if j != i && m.get(i, j) == 0.0 {
                m.set(i, j, -1.0);
            }
        }
    }
    for i in 0..n {
        let d: f64 = (0..n).filter(|&j| j != i).map(|j| -m.get(i, j)).sum();
        m.set(i, i, d);
    }
    m
}

/// Signed adjacency-like matrix of the cycle with `neg` edges made positive.
pub fn signed_cycle(n: usize, flipped: &[usize]) -> DenseSymmetricMatrix {
    let mut m = DenseSymmetricMatrix::zeros(n);
    for i in 0..n {
        let j = (i + 1) % n;
        m.set(i, j, if flipped.contains(&i) { 1.0 } else { -1.0 });
    }
    m
}

/// `P D M D P^T` for a random sign pattern `D` and permutation `P`.
pub fn relabel_and_switch(m: &DenseSymmetricMatrix, seed: u64) -> DenseSymmetricMatrix {
    let n = m.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signs: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    let d = StateVector::new(signs).expect("signs are +-1");
    let sw = m.switched(&d).expect("dimensions agree");
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    DenseSymmetricMatrix::from_fn(n, |i, j| sw.get(perm[i], perm[j]))
}

/// Named instance with an eigenvalue of multiplicity at least two.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub matrix: DenseSymmetricMatrix,
}

fn inst(name: impl Into<String>, matrix: DenseSymmetricMatrix) -> Instance {
    Instance { name: name.into(), matrix }
}

/// Fifty small instances: stars, complete bipartite graphs, circulants and
/// relabeled, switched copies of the 16-vertex example.
pub fn multiplicity_suite() -> Vec<Instance> {
    let mut out = Vec::new();
    for n in 4..=10 {
        out.push(inst(format!("star{n}"), star_laplacian(n)));
    }
    for (a, b) in [(2, 3), (2, 4), (3, 3), (3, 4), (2, 5), (3, 5), (4, 4), (4, 5), (2, 6), (3, 6)] {
        out.push(inst(format!("K{a},{b}"), complete_bipartite_laplacian(a, b)));
    }
    for n in 5..=14 {
        out.push(inst(format!("C{n}"), circulant_laplacian(n, &[1])));
    }
    for (n, jumps) in [
        (6, vec![1, 2]),
        (7, vec![1, 2]),
        (8, vec![1, 2]),
        (8, vec![1, 3]),
        (9, vec![1, 3]),
        (10, vec![1, 2]),
        (10, vec![1, 4]),
        (11, vec![1, 3]),
        (12, vec![1, 5]),
        (12, vec![1, 2, 3]),
    ] {
        let tag = jumps.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        out.push(inst(format!("C{n}({tag})"), circulant_laplacian(n, &jumps)));
    }
    out.push(inst("example16", example16()));
    for seed in 1..=12 {
        out.push(inst(format!("example16-relabeled{seed}"), relabel_and_switch(&example16(), seed)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eigendecompose, group_eigenvalues, DEFAULT_GROUP_TOL};

    #[test]
    fn suite_has_fifty_instances() {
        assert_eq!(multiplicity_suite().len(), 50);
    }

    #[test]
    fn example16_zero_eigenspace() {
        let m = example16();
        let spec = eigendecompose(&m).unwrap();
        let groups = group_eigenvalues(&spec, DEFAULT_GROUP_TOL);
        let g = groups.iter().find(|g| g.lambda.abs() < 1e-8).unwrap();
        assert_eq!((g.index_k, g.multiplicity_r), (7, 6));
    }

    #[test]
    fn complete_bipartite_spectrum() {
        let spec = eigendecompose(&complete_bipartite_laplacian(2, 3)).unwrap();
        let want = [0.0, 2.0, 2.0, 3.0, 5.0];
        for (a, b) in spec.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
