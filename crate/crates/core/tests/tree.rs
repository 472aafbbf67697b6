mod common;

use std::collections::HashMap;

use common::{canonical, isomorphic, leaves_below, random_tree};
use proptest::prelude::*;
use ultrahaar::tree::{
    build_caterpillar, build_perfect_binary, parse_newick, random_orb_tree, tree_stats, write_newick, Children,
    LengthLaw, NewickOptions,
};
use ultrahaar::{NodeId, OrbTree};

fn check_structure(t: &OrbTree) {
    assert!(t.validate().is_empty(), "{:?}", t.validate());
    assert_eq!(t.n_leaves(), t.n_internal());
    for v in t.nodes() {
        let below = leaves_below(t, v);
        assert_eq!(t.leaf_count(v), below.len());
        let r = t.leaf_range(v);
        assert_eq!((r.start..r.end).collect::<Vec<_>>(), below);
        for i in below {
            assert!(t.is_ancestor(v, t.leaf_node(i)));
        }
    }
}

/// Plane shape of the binary part, ignoring lengths and labels.
fn shape(t: &OrbTree, v: NodeId) -> String {
    match t.children(v) {
        Children::Leaf => "x".into(),
        Children::Single(c) => shape(t, c),
        Children::Pair(a, b) => format!("({},{})", shape(t, a), shape(t, b)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_trees_are_valid(n in 1usize..300, seed: u64) {
        check_structure(&random_tree(n, seed));
    }

    #[test]
    fn newick_round_trip(n in 1usize..200, seed: u64) {
        let t = random_tree(n, seed);
        let text = write_newick(&t);
        let back = parse_newick(&text, &NewickOptions::default()).unwrap();
        prop_assert!(isomorphic(&canonical(&t, 0.0), &canonical(&back, 0.0), 0.0));
        // Lengths survive bit for bit.
        prop_assert_eq!(t.branch_lengths(), back.branch_lengths());
        prop_assert_eq!(write_newick(&back), text);
    }

    #[test]
    fn path_length_identities(n in 1usize..400, seed: u64) {
        let t = random_tree(n, seed);
        let s = tree_stats(&t);
        let size = 2 * n as u64;
        prop_assert_eq!(s.epl - s.ipl, 2 * n as u64 - 1);
        prop_assert_eq!(s.tpl, s.ipl + s.epl);
        // (avg - 1) |T| = TPL with |T| = 2n, compared after rounding.
        prop_assert_eq!(((s.avg_subtree - 1.0) * size as f64).round() as u64, s.tpl);
        prop_assert!(s.zeta_lower_bound >= 0.0 && s.zeta_lower_bound <= 1.0);
    }
}

#[test]
fn parse_write_parse_handles_comments_quotes_and_whitespace() {
    let t = parse_newick(" ( ('a b':1.5 , [c] 'it''s':0.25 )x:0 , c:2 ) : 1 ; ", &NewickOptions::default()).unwrap();
    assert_eq!(t.leaf_labels(), ["a b", "it's", "c"]);
    let again = parse_newick(&write_newick(&t), &NewickOptions::default()).unwrap();
    assert_eq!(t, again);
}

#[test]
fn multifurcation_policy() {
    let text = "(a:1,b:1,c:1):1;";
    assert!(parse_newick(text, &NewickOptions::default()).is_err());
    let t = parse_newick(text, &NewickOptions { binarize: true }).unwrap();
    check_structure(&t);
    assert_eq!(t.n_leaves(), 3);
}

#[test]
fn family_builders_are_valid() {
    for h in 1..8 {
        check_structure(&build_perfect_binary(h, &vec![1.0; h + 1]).unwrap());
        let spine = vec![1.0; h];
        let pend = vec![1.0; h - 1];
        check_structure(&build_caterpillar(h, &spine, &pend).unwrap());
    }
}

#[test]
fn stats_closed_forms() {
    for h in 1..=12usize {
        let t = build_perfect_binary(h, &vec![1.0; h + 1]).unwrap();
        let s = tree_stats(&t);
        let two_h = (1u64 << h) as f64;
        assert!((s.interior_avg_subtree - (h as f64 + 1.0 / two_h)).abs() < 1e-12);
        let bound = 1.0 + 1.0 / two_h - 2.0 * (h as f64 + 1.0 / two_h) / two_h;
        assert!((s.zeta_lower_bound - bound.max(0.0)).abs() < 1e-12, "h={h}");
    }
    let h = 10;
    let s = tree_stats(&build_perfect_binary(h, &vec![1.0; h + 1]).unwrap());
    assert!((s.zeta_lower_bound - 0.98145).abs() < 1e-4);
    for h in 1..=12usize {
        let t = build_caterpillar(h, &vec![1.0; h], &vec![1.0; h - 1]).unwrap();
        let s = tree_stats(&t);
        assert!((s.interior_avg_subtree - (h as f64 + 1.0) / 2.0).abs() < 1e-12);
    }
}

/// Rémy's procedure samples plane full binary trees uniformly. For each size
/// every shape must appear, with counts within 3 standard deviations of the
/// multinomial mean.
#[test]
fn remy_shapes_are_uniform() {
    const SAMPLES: u64 = 100_000;
    let catalan = [1usize, 1, 2, 5, 14];
    for n_internal in 2..=5usize {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let law = LengthLaw::default();
        for seed in 0..SAMPLES {
            let t = random_orb_tree(n_internal, seed ^ 0xabcd_0000 ^ ((n_internal as u64) << 40), &law).unwrap();
            *counts.entry(shape(&t, t.root())).or_default() += 1;
        }
        let k = catalan[n_internal - 1];
        assert_eq!(counts.len(), k, "n_internal={n_internal}");
        let p = 1.0 / k as f64;
        let mean = SAMPLES as f64 * p;
        let sd = (SAMPLES as f64 * p * (1.0 - p)).sqrt();
        for (s, c) in counts {
            assert!((c as f64 - mean).abs() <= 3.0 * sd.max(1e-9), "{s}: {c} vs {mean}");
        }
    }
}
