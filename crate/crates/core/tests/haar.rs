mod common;

use common::{basis_oracle, covariance_oracle, dyadic_tree, random_tree, trace_length_oracle, wavelet_oracle};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use ultrahaar::haar::{
    haar_basis, observed_sparsity, sparsify, zero_threshold, Method, ReferenceMode, SparseSymMatrix, SparsifyOptions,
    TraceLengths,
};
use ultrahaar::tree::{build_perfect_binary, tree_stats};

fn fast(t: &ultrahaar::OrbTree) -> ultrahaar::haar::Sparsified {
    sparsify(t, &SparsifyOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn basis_is_orthonormal(n in 1usize..=1024, seed: u64) {
        let t = random_tree(n, seed);
        let phi = haar_basis(&t).to_dense().unwrap();
        let gram = phi.transpose() * &phi;
        prop_assert!((gram - DMatrix::identity(n, n)).amax() <= 1e-12);
    }

    #[test]
    fn basis_matches_oracle_and_inverts(n in 1usize..=300, seed: u64) {
        let t = random_tree(n, seed);
        let b = haar_basis(&t);
        prop_assert!((b.to_dense().unwrap() - basis_oracle(&t)).amax() <= 1e-15);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let back = b.inverse(&b.transform(&x).unwrap()).unwrap();
        for (a, c) in x.iter().zip(&back) {
            prop_assert!((a - c).abs() <= 1e-12);
        }
    }

    /// S phi_v = diag(l*(L, v)) phi_v at every internal node.
    #[test]
    fn wavelets_are_scaled_by_trace_lengths(n in 1usize..=256, seed: u64) {
        let t = random_tree(n, seed);
        let s = covariance_oracle(&t);
        let tl = TraceLengths::new(&t);
        let scale = s.amax();
        for v in t.internal_nodes() {
            let phi = DVector::from_vec(wavelet_oracle(&t, v));
            let sphi = &s * &phi;
            for i in t.leaf_range(v) {
                let l = trace_length_oracle(&t, i, v);
                prop_assert!((tl.between(&t, i, v).unwrap() - l).abs() <= 1e-12 * (1.0 + l));
                prop_assert!((sphi[i] - l * phi[i]).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn sparsify_matches_dense_conjugate(n in 1usize..=200, seed: u64) {
        let t = random_tree(n, seed);
        let phi = basis_oracle(&t);
        let dense = phi.transpose() * covariance_oracle(&t) * &phi;
        let sp = fast(&t);
        let got = sp.matrix.to_dense().unwrap();
        let tol = 1e-10 * dense.amax();
        prop_assert!((&got - &dense).amax() <= tol);
        for r in 0..n {
            prop_assert_eq!(sp.lambda[r], sp.matrix.get(r, r));
        }
    }

    /// Off-diagonal coordinates appear only for ancestor pairs.
    #[test]
    fn support_law(n in 1usize..=400, seed: u64) {
        let t = random_tree(n, seed);
        let sp = fast(&t);
        for e in sp.matrix.triplets() {
            if e.row != e.col {
                let (u, v) = (t.internal_node(e.row), t.internal_node(e.col));
                prop_assert!(t.is_ancestor(u, v) || t.is_ancestor(v, u));
            }
        }
    }

    #[test]
    fn trace_is_preserved(n in 1usize..=1000, seed: u64) {
        let t = random_tree(n, seed);
        let sp = fast(&t);
        // trace(S) is the sum of leaf-to-root distances.
        let trace: f64 = t.root_distances().iter().enumerate()
            .filter(|(v, _)| t.is_leaf(ultrahaar::NodeId(*v)))
            .map(|(_, d)| d)
            .sum();
        let sum: f64 = sp.lambda.iter().sum();
        prop_assert!((sum - trace).abs() <= 1e-9 * trace);
    }

    #[test]
    fn observed_sparsity_respects_bound(n in 1usize..=600, seed: u64) {
        let t = random_tree(n, seed);
        let zeta = observed_sparsity(&fast(&t).matrix);
        prop_assert!(zeta >= tree_stats(&t).zeta_lower_bound);
    }

    #[test]
    fn reference_paths_agree(n in 1usize..=128, seed: u64) {
        let t = dyadic_tree(n, seed);
        let f = fast(&t);
        let factored = sparsify(&t, &SparsifyOptions { method: Method::Reference(ReferenceMode::Factored), ..Default::default() }).unwrap();
        prop_assert_eq!(&f, &factored);
        let t = random_tree(n, seed);
        let f = fast(&t);
        let literal = sparsify(&t, &SparsifyOptions { method: Method::Reference(ReferenceMode::Literal), ..Default::default() }).unwrap();
        let d = f.matrix.to_dense().unwrap() - literal.matrix.to_dense().unwrap();
        prop_assert!(d.amax() <= 1e-10 * f.matrix.to_dense().unwrap().amax());
    }
}

#[test]
fn perfect_binary_sparsity_bound() {
    for h in 3..=10usize {
        let t = build_perfect_binary(h, &vec![1.0; h + 1]).unwrap();
        let sp = fast(&t);
        let s = tree_stats(&t);
        assert!(observed_sparsity(&sp.matrix) >= s.zeta_lower_bound, "h={h}");
    }
}

#[test]
fn drop_tolerance_prunes_small_entries() {
    let t = random_tree(64, 5);
    let all = fast(&t);
    let cut = 1e-2;
    let pruned = sparsify(&t, &SparsifyOptions { drop_tol: cut, ..Default::default() }).unwrap();
    assert!(pruned.matrix.stored() < all.matrix.stored());
    for e in pruned.matrix.triplets() {
        assert!(e.row == e.col || e.value.abs() > cut);
        assert_eq!(e.value, all.matrix.get(e.row, e.col));
    }
    assert_eq!(pruned.lambda, all.lambda);
}

#[test]
fn diagonal_matrix_sparsity() {
    let n = 9;
    let m = SparseSymMatrix::from_dense(&DMatrix::from_diagonal_element(n, n, 2.0), 0.0);
    assert!((observed_sparsity(&m) - (1.0 - 1.0 / n as f64)).abs() < 1e-15);
    assert!(zero_threshold(&m) > 0.0);
}
