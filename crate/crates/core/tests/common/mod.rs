//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's numerical routines; only tree accessors are used.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use ultrahaar::tree::{parse_newick, random_orb_tree, Children, LengthLaw, NewickOptions};
use ultrahaar::{NodeId, OrbTree};

pub const THREE_LEAF: &str = "((1:3,2:1):0,3:2):2;";

pub fn three_leaf() -> OrbTree {
    parse_newick(THREE_LEAF, &NewickOptions::default()).unwrap()
}

pub fn random_tree(n: usize, seed: u64) -> OrbTree {
    random_orb_tree(n, seed, &LengthLaw::default()).unwrap()
}

/// Random topology with branch lengths in `{1/8, ..., 2}` so that every sum
/// the algorithms form is exact in floating point.
pub fn dyadic_tree(n: usize, seed: u64) -> OrbTree {
    let t = random_tree(n, seed);
    let lengths: Vec<f64> = (0..t.node_count())
        .map(|v| {
            let x = t.branch_length(NodeId(v));
            ((x * 16.0).floor() + 1.0) / 8.0
        })
        .collect();
    t.with_branch_lengths(&lengths).unwrap()
}

fn kids(t: &OrbTree, v: NodeId) -> Vec<NodeId> {
    match t.children(v) {
        Children::Leaf => vec![],
        Children::Single(c) => vec![c],
        Children::Pair(a, b) => vec![a, b],
    }
}

/// Leaf indices below `v`, found by walking the tree.
pub fn leaves_below(t: &OrbTree, v: NodeId) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        if t.is_leaf(x) {
            out.push(t.leaf_index(x).unwrap());
        }
        stack.extend(kids(t, x));
    }
    out.sort_unstable();
    out
}

/// `S = sum_e l(e) 1_{L(e)} 1_{L(e)}'`, accumulated with Kahan summation.
pub fn covariance_oracle(t: &OrbTree) -> DMatrix<f64> {
    let n = t.n_leaves();
    let mut sum = DMatrix::zeros(n, n);
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for v in t.nodes() {
        if t.is_root(v) {
            continue;
        }
        let l = t.branch_length(v);
        let below = leaves_below(t, v);
        for &i in &below {
            for &j in &below {
                let y = l - comp[(i, j)];
                let s = sum[(i, j)] + y;
                comp[(i, j)] = (s - sum[(i, j)]) - y;
                sum[(i, j)] = s;
            }
        }
    }
    sum
}

/// Wavelet of internal node `v` as a dense vector.
pub fn wavelet_oracle(t: &OrbTree, v: NodeId) -> Vec<f64> {
    let n = t.n_leaves();
    let mut phi = vec![0.0; n];
    match t.children(v) {
        Children::Pair(a, b) => {
            let (l0, l1) = (leaves_below(t, a), leaves_below(t, b));
            let (n0, n1) = (l0.len() as f64, l1.len() as f64);
            let tot = n0 + n1;
            for i in l0 {
                phi[i] = (n1 / (n0 * tot)).sqrt();
            }
            for i in l1 {
                phi[i] = -(n0 / (n1 * tot)).sqrt();
            }
        }
        _ => phi.iter_mut().for_each(|x| *x = 1.0 / (n as f64).sqrt()),
    }
    phi
}

/// Columns are wavelets in internal-rank order.
pub fn basis_oracle(t: &OrbTree) -> DMatrix<f64> {
    let n = t.n_leaves();
    let mut m = DMatrix::zeros(n, n);
    for r in 0..n {
        let phi = wavelet_oracle(t, t.internal_node(r));
        for i in 0..n {
            m[(i, r)] = phi[i];
        }
    }
    m
}

/// `l*(i, v)`: sum of trace lengths on the path from leaf `i` up to `v`.
pub fn trace_length_oracle(t: &OrbTree, i: usize, v: NodeId) -> f64 {
    let mut x = t.leaf_node(i);
    let mut s = 0.0;
    while x != v {
        s += leaves_below(t, x).len() as f64 * t.branch_length(x);
        x = t.parent(x).expect("v must be an ancestor of leaf i");
    }
    s
}

/// Eigenvalues in decreasing order.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// Shape of a tree after contracting internal edges of length `<= tol`, with
/// children ordered by their smallest leaf label so that child order does not
/// matter.
#[derive(Debug, Clone)]
pub enum Canon {
    Leaf { label: String, length: f64 },
    Node { length: f64, children: Vec<Canon> },
}

impl Canon {
    fn key(&self) -> String {
        match self {
            Canon::Leaf { label, .. } => label.clone(),
            Canon::Node { children, .. } => children.iter().map(Canon::key).min().unwrap_or_default(),
        }
    }

    fn length(&self) -> f64 {
        match self {
            Canon::Leaf { length, .. } | Canon::Node { length, .. } => *length,
        }
    }
}

pub fn canonical(t: &OrbTree, tol: f64) -> Canon {
    fn build(t: &OrbTree, v: NodeId, tol: f64) -> Canon {
        let length = if t.is_root(v) { 0.0 } else { t.branch_length(v) };
        if t.is_leaf(v) {
            return Canon::Leaf {
                label: t.leaf_label(t.leaf_index(v).unwrap()).to_string(),
                length,
            };
        }
        let mut children = Vec::new();
        for c in kids(t, v) {
            match build(t, c, tol) {
                Canon::Node { length, children: grand } if length <= tol && !t.is_root(v) => children.extend(grand),
                other => children.push(other),
            }
        }
        children.sort_by_key(Canon::key);
        Canon::Node { length, children }
    }
    build(t, t.root(), tol)
}

pub fn isomorphic(a: &Canon, b: &Canon, tol: f64) -> bool {
    let close = (a.length() - b.length()).abs() <= tol * (1.0 + a.length().abs());
    match (a, b) {
        (Canon::Leaf { label: x, .. }, Canon::Leaf { label: y, .. }) => close && x == y,
        (Canon::Node { children: x, .. }, Canon::Node { children: y, .. }) => {
            close && x.len() == y.len() && x.iter().zip(y).all(|(p, q)| isomorphic(p, q, tol))
        }
        _ => false,
    }
}

/// Normalize nonnegative weights to a probability vector.
pub fn normalized(x: &[f64]) -> Vec<f64> {
    let s: f64 = x.iter().sum();
    x.iter().map(|v| v / s).collect()
}
