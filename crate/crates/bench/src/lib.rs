//! Shared inputs for the benchmarks.

use nodalkit_core::fixtures::{circulant_laplacian, example16};
use nodalkit_core::random::{random_signs, sample_gnpq, GnpqParams};
use nodalkit_core::{DenseSymmetricMatrix, SignedGraph};

/// A `G(n, 1/2, 1/2)` adjacency matrix and its graph.
pub fn random_graph(n: usize, seed: u64) -> (SignedGraph, DenseSymmetricMatrix) {
    sample_gnpq(&GnpqParams { n, p: 0.5, q: 0.5, seed }).expect("valid parameters")
}

/// A frustrated sparse graph: a circulant with one flipped jump.
pub fn frustrated(n: usize) -> (SignedGraph, DenseSymmetricMatrix) {
    let mut m = circulant_laplacian(n, &[1, 3]);
    for i in (0..n).step_by(4) {
        let j = (i + 3) % n;
        m.set(i, j, -m.get(i, j));
    }
    let g = SignedGraph::from_symmetric_matrix(&m, 1e-12).expect("finite matrix");
    (g, m)
}

pub fn sign_vector(n: usize, seed: u64) -> Vec<f64> {
    random_signs(n, seed, "bench")
}

pub fn worked_example() -> DenseSymmetricMatrix {
    example16()
}
