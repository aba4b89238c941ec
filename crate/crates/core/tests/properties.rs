mod common;

use nodalkit_core::basis::{
    analyze_eigenspace, construct_signed_basis, perturbation_stability_test, validate_signed_basis,
    ConstructionConfig, StructureConfig, ValidationConfig,
};
use nodalkit_core::fixtures::{multiplicity_suite, relabel_and_switch};
use nodalkit_core::frustration::{frustration_index_exact, frustration_index_heuristic};
use nodalkit_core::graph::DEFAULT_ZERO_TOL;
use nodalkit_core::io::{parse_edge_list, write_edge_list};
use nodalkit_core::linalg::{dot, project_out};
use nodalkit_core::nodal::{
    minimal_nodal_decomposition_exact, minimal_nodal_decomposition_heuristic, validate_decomposition,
    SignConvention,
};
use nodalkit_core::spectral::{eigendecompose, group_eigenvalues, DEFAULT_GROUP_TOL};
use nodalkit_core::{DenseSymmetricMatrix, SignedGraph, StateVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn matrix(max_n: usize) -> impl Strategy<Value = DenseSymmetricMatrix> {
    (2..=max_n, any::<u64>()).prop_map(|(n, seed)| random_integer_matrix(&mut ChaCha8Rng::seed_from_u64(seed), n))
}

fn with_signs(max_n: usize) -> impl Strategy<Value = (DenseSymmetricMatrix, Vec<f64>, Vec<i8>)> {
    matrix(max_n).prop_flat_map(|m| {
        let n = m.n();
        (
            Just(m),
            prop::collection::vec(prop_oneof![(0.1f64..3.0), (-3.0f64..-0.1)], n),
            prop::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n),
        )
    })
}

fn graph(m: &DenseSymmetricMatrix) -> SignedGraph {
    SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn nodal_count_is_switching_invariant((m, x, d) in with_signs(9)) {
        let state = StateVector::new(d.clone()).unwrap();
        let sw = m.switched(&state).unwrap();
        let dx: Vec<f64> = x.iter().zip(&d).map(|(a, &b)| a * f64::from(b)).collect();
        let conv = SignConvention::LaplacianLike;
        let a = minimal_nodal_decomposition_exact(&graph(&m), &m, &x, conv).unwrap();
        let b = minimal_nodal_decomposition_exact(&graph(&sw), &sw, &dx, conv).unwrap();
        prop_assert_eq!(a.size, b.size);
        prop_assert_eq!(frustration_index_exact(&graph(&m)).unwrap().f, frustration_index_exact(&graph(&sw)).unwrap().f);
    }

    #[test]
    fn conventions_are_dual_under_negation((m, x, _d) in with_signs(9)) {
        let neg = m.negated();
        let a = minimal_nodal_decomposition_exact(&graph(&m), &m, &x, SignConvention::LaplacianLike).unwrap();
        let b = minimal_nodal_decomposition_exact(&graph(&neg), &neg, &x, SignConvention::AdjacencyLike).unwrap();
        prop_assert_eq!(a.size, b.size);
    }

    #[test]
    fn exact_matches_partition_oracle((m, x, _d) in with_signs(7)) {
        let g = graph(&m);
        let all: Vec<usize> = (0..m.n()).collect();
        for conv in [SignConvention::LaplacianLike, SignConvention::AdjacencyLike] {
            let d = minimal_nodal_decomposition_exact(&g, &m, &x, conv).unwrap();
            prop_assert!(validate_decomposition(&g, &m, &x, conv, &all, &d.parts).is_ok());
            prop_assert_eq!(d.size, brute_nodal(&m, &x, conv, &all));
        }
    }

    #[test]
    fn heuristic_is_valid_and_not_below_exact((m, x, _d) in with_signs(12), seed in any::<u64>()) {
        let g = graph(&m);
        let all: Vec<usize> = (0..m.n()).collect();
        let conv = SignConvention::AdjacencyLike;
        let h = minimal_nodal_decomposition_heuristic(&g, &m, &x, conv, seed).unwrap();
        let e = minimal_nodal_decomposition_exact(&g, &m, &x, conv).unwrap();
        prop_assert!(validate_decomposition(&g, &m, &x, conv, &all, &h.parts).is_ok());
        prop_assert!(h.size >= e.size);
        prop_assert_eq!(h, minimal_nodal_decomposition_heuristic(&g, &m, &x, conv, seed).unwrap());
    }

    #[test]
    fn frustration_matches_enumeration(m in matrix(11), seed in any::<u64>()) {
        let g = graph(&m);
        let exact = frustration_index_exact(&g).unwrap();
        prop_assert_eq!(exact.f, brute_frustration(&m));
        prop_assert_eq!(g.frustrated_edge_count(&exact.witness).unwrap(), exact.f);
        prop_assert!(frustration_index_heuristic(&g, seed, 4).f >= exact.f);
    }

    #[test]
    fn edge_list_round_trip(m in matrix(12)) {
        let g = graph(&m);
        prop_assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }
}

/// Relabeled, switched copies of the suite: the construction's `s = 1` path
/// and the whole pipeline must succeed on every one.
fn degenerate_instance() -> impl Strategy<Value = DenseSymmetricMatrix> {
    let suite = multiplicity_suite();
    (0..suite.len(), any::<u64>()).prop_map(move |(i, seed)| relabel_and_switch(&suite[i].matrix, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn construction_succeeds_on_degenerate_instances(m in degenerate_instance()) {
        let spec = eigendecompose(&m).unwrap();
        for g in group_eigenvalues(&spec, DEFAULT_GROUP_TOL).iter().filter(|g| g.multiplicity_r > 1) {
            let st = analyze_eigenspace(&m, g, &StructureConfig::default()).unwrap();
            prop_assert!(st.check().is_ok());
            prop_assert!(st.k_hat + st.r_hat <= g.index_k + g.multiplicity_r);
            let res = construct_signed_basis(&m, g, &st, &ConstructionConfig::default()).unwrap();
            let rep = validate_signed_basis(&m, g, &res, res.f, &ValidationConfig::default()).unwrap();
            prop_assert!(rep.all_pass && rep.complete, "{:?}", rep);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The free vectors span the eigenspace, and any assignment of the free
    /// coefficients completed through the pivot formulas is an eigenvector.
    #[test]
    fn structure_reconstructs_eigenspace(m in degenerate_instance(), seed in any::<u64>()) {
        use rand::Rng;
        let spec = eigendecompose(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in group_eigenvalues(&spec, DEFAULT_GROUP_TOL).iter().filter(|g| g.multiplicity_r > 1) {
            let st = analyze_eigenspace(&m, g, &StructureConfig::default()).unwrap();
            let pivots = st.pivot_vars();
            let mut span: Vec<Vec<f64>> = Vec::new();
            for w in st.free_vectors().into_iter().enumerate().filter(|(v, _)| !pivots.contains(v)).map(|(_, w)| w) {
                let mut r = w.clone();
                project_out(&mut r, &g.basis);
                prop_assert!(dot(&r, &r).sqrt() <= 1e-8 * dot(&w, &w).sqrt().max(1.0));
                span.push(w);
            }
            prop_assert_eq!(span.len(), g.multiplicity_r);
            for _ in 0..100 {
                let mut alpha: Vec<f64> = (0..st.r_hat).map(|_| rng.random_range(-2.0..2.0)).collect();
                st.complete_alpha(&mut alpha);
                let x = st.vector_from_alpha(&alpha);
                let scale = dot(&x, &x).sqrt().max(1.0);
                prop_assert!(m.residual(g.lambda, &x) <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn switched_input_gives_valid_switched_back_basis(i in 0usize..50, d_seed in any::<u64>()) {
        use rand::Rng;
        let inst = &multiplicity_suite()[i];
        let n = inst.matrix.n();
        let mut rng = ChaCha8Rng::seed_from_u64(d_seed);
        let d = StateVector::new((0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()).unwrap();
        let sw = inst.matrix.switched(&d).unwrap();
        let spec = eigendecompose(&sw).unwrap();
        for g in group_eigenvalues(&spec, DEFAULT_GROUP_TOL).iter().filter(|g| g.multiplicity_r > 1) {
            let st = analyze_eigenspace(&sw, g, &StructureConfig::default()).unwrap();
            let res = construct_signed_basis(&sw, g, &st, &ConstructionConfig::default()).unwrap();
            // Map the basis back to the original matrix and re-validate there.
            let mut back = res.clone();
            for v in &mut back.vectors {
                for (j, &s) in d.values().iter().enumerate() {
                    v.phi[j] *= f64::from(s);
                    v.eps[j] *= s;
                }
            }
            let mut g0 = g.clone();
            for b in &mut g0.basis {
                for (j, &s) in d.values().iter().enumerate() {
                    b[j] *= f64::from(s);
                }
            }
            let rep = validate_signed_basis(&inst.matrix, &g0, &back, res.f, &ValidationConfig::default()).unwrap();
            prop_assert!(rep.all_pass, "{:?}", rep);
        }
    }

    #[test]
    fn zero_radius_perturbation_is_identity(i in 0usize..50, seed in any::<u64>()) {
        let inst = &multiplicity_suite()[i];
        let spec = eigendecompose(&inst.matrix).unwrap();
        let g = group_eigenvalues(&spec, DEFAULT_GROUP_TOL).into_iter().max_by_key(|g| g.multiplicity_r).unwrap();
        let st = analyze_eigenspace(&inst.matrix, &g, &StructureConfig::default()).unwrap();
        let res = construct_signed_basis(&inst.matrix, &g, &st, &ConstructionConfig::default()).unwrap();
        let rep = perturbation_stability_test(&inst.matrix, &res, 0.0, 4, seed).unwrap();
        prop_assert_eq!(rep.fraction, 1.0);
    }
}
