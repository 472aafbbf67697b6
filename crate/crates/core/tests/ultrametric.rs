mod common;

use common::{canonical, covariance_oracle, dense_eigenvalues, isomorphic, random_tree};
use nalgebra::DMatrix;
use proptest::prelude::*;
use ultrahaar::ultrametric::{
    covariance_from_tree, inverse_sign_check, is_strictly_ultrametric, tree_from_matrix, StrictUltrametricMatrix,
    DEFAULT_SPLIT_TOL,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_matrix_bijection(n in 1usize..=256, seed: u64) {
        let t = random_tree(n, seed);
        let s = covariance_from_tree(&t).unwrap();
        let back = tree_from_matrix(&s, DEFAULT_SPLIT_TOL).unwrap();
        prop_assert!(isomorphic(&canonical(&t, 0.0), &canonical(&back, 1e-12), 1e-10));
        let s2 = covariance_from_tree(&back).unwrap();
        let max = s.entries().amax();
        prop_assert!((s.entries() - s2.entries()).amax() <= 1e-10 * max);
        // The root edge of the recovered tree carries the minimum entry.
        let top = back.internal_node(back.n_internal() - 1);
        let root_child = match back.children(top) {
            ultrahaar::tree::Children::Single(c) => c,
            _ => top,
        };
        if n > 1 {
            prop_assert!((back.branch_length(root_child) - s.entries().min()).abs() <= 1e-12 * max);
        }
    }

    #[test]
    fn covariance_matches_rank_one_expansion(n in 1usize..=200, seed: u64) {
        let t = random_tree(n, seed);
        let s = covariance_from_tree(&t).unwrap();
        let oracle = covariance_oracle(&t);
        prop_assert!((s.entries() - &oracle).amax() <= 1e-12 * oracle.amax());
        prop_assert!(is_strictly_ultrametric(s.entries(), 0.0).is_ok());
    }

    #[test]
    fn covariance_is_positive_definite(n in 1usize..=128, seed: u64) {
        let s = covariance_from_tree(&random_tree(n, seed)).unwrap();
        let e = dense_eigenvalues(s.entries());
        prop_assert!(*e.last().unwrap() > 0.0);
    }

    #[test]
    fn inverse_sign_pattern(n in 1usize..=128, seed: u64) {
        let s = covariance_from_tree(&random_tree(n, seed)).unwrap();
        let rep = inverse_sign_check(s.entries(), 1e-9).unwrap();
        prop_assert!(rep.is_ok(), "{:?}", (rep.positive_off_diagonal, rep.not_dominant, rep.pattern_mismatch));
    }
}

#[test]
fn one_by_one() {
    let m = DMatrix::from_element(1, 1, 7.0);
    assert!(is_strictly_ultrametric(&m, 0.0).is_ok());
    let rep = inverse_sign_check(&m, 1e-9).unwrap();
    assert!(rep.is_ok());
    assert!((rep.inverse[(0, 0)] - 1.0 / 7.0).abs() < 1e-15);
}

#[test]
fn violations_are_reported() {
    let base = DMatrix::from_row_slice(3, 3, &[5.0, 2.0, 2.0, 2.0, 3.0, 2.0, 2.0, 2.0, 4.0]);
    assert!(is_strictly_ultrametric(&base, 0.0).is_ok());

    let mut triple = base.clone();
    triple[(0, 1)] = 2.5;
    triple[(1, 0)] = 2.5;
    triple[(0, 2)] = 1.0;
    triple[(2, 0)] = 1.0;
    let rep = is_strictly_ultrametric(&triple, 0.0);
    assert!(!rep.is_ok());

    let mut diag = base.clone();
    diag[(1, 1)] = 2.0;
    assert!(!is_strictly_ultrametric(&diag, 0.0).is_ok());

    let mut asym = base.clone();
    asym[(0, 1)] = 1.0;
    assert!(!is_strictly_ultrametric(&asym, 0.0).is_ok());

    let labels = vec!["a".into(), "b".into(), "c".into()];
    assert!(StrictUltrametricMatrix::new(labels, asym, 0.0).is_err());
}

#[test]
fn non_ultrametric_inverse_fails() {
    // Positive definite but not ultrametric: the inverse has a positive
    // off-diagonal entry.
    let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
    let rep = inverse_sign_check(&m, 1e-9).unwrap();
    assert_eq!(rep.positive_off_diagonal, Some((0, 2)));
    assert!(rep.pattern_mismatch.is_some());
}
