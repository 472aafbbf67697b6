use nalgebra::DMatrix;

use super::{split_weights, HaarBasis, SparseSymMatrix, TraceLengths, Triplet};
use crate::exec;
use crate::tree::{Children, NodeId, OrbTree};
use crate::ultrametric::StrictUltrametricMatrix;
use crate::{Error, Result};

/// Largest dimension accepted by [`dense_conjugate`].
pub const CONJUGATE_LIMIT: usize = 4096;

/// Cap on `sum_v |L(v)|` for the per-leaf reference path.
const REFERENCE_WORK_LIMIT: usize = 1 << 27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed-form evaluation from subtree aggregates.
    #[default]
    Fast,
    /// Per-leaf evaluation that stores `l*(i, v)` for every leaf of every node.
    Reference(ReferenceMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMode {
    /// Every entry is the plain sum of `phi_u(i) phi_v(i) l*(i, v)` over leaves.
    Literal,
    /// Per-leaf sums are grouped by side and combined with the same closed
    /// form as [`Method::Fast`]; on inputs where all sums are exact the two
    /// paths agree bit for bit.
    Factored,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SparsifyOptions {
    /// Off-diagonal entries with magnitude at most this are not stored.
    pub drop_tol: f64,
    pub method: Method,
}

/// `Phi' S Phi` in sparse form plus its diagonal, both indexed by internal rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsified {
    pub matrix: SparseSymMatrix,
    pub lambda: Vec<f64>,
}

/// Per-node quantities shared by every entry in a row: `lambda_v` and the
/// factor `A_v = sum_{i in L(v)} phi_v(i) l*(i, v)`, so that
/// `M(u, v) = phi_u(L(v)) A_v` for any proper ancestor `u` of `v`.
#[derive(Debug, Clone, Copy)]
struct RowFactors {
    lambda: f64,
    a: f64,
}

fn row_factors(n0: usize, n1: usize, sum0: f64, sum1: f64) -> RowFactors {
    let (a0, a1) = (n0 as f64, n1 as f64);
    let n = a0 + a1;
    RowFactors {
        lambda: a1 / (a0 * n) * sum0 + a0 / (a1 * n) * sum1,
        a: (a0 * a1 / n).sqrt() * (sum0 / a0 - sum1 / a1),
    }
}

/// Value of `phi_u` on the leaves below its child `child`.
fn ancestor_weight(tree: &OrbTree, u: NodeId, child: NodeId) -> f64 {
    match tree.children(u) {
        Children::Pair(a, b) => {
            let (pos, neg) = split_weights(tree.leaf_count(a), tree.leaf_count(b));
            if child == a {
                pos
            } else {
                neg
            }
        }
        _ => 1.0 / (tree.leaf_count(u) as f64).sqrt(),
    }
}

/// Compute every entry of `Phi' S Phi` that can be nonzero, directly from the
/// tree. Only pairs in which one node is an ancestor of the other are visited.
pub fn sparsify(tree: &OrbTree, options: &SparsifyOptions) -> Result<Sparsified> {
    match options.method {
        Method::Fast => Ok(fast(tree, options.drop_tol)),
        Method::Reference(mode) => reference(tree, options.drop_tol, mode),
    }
}

fn fast(tree: &OrbTree, drop_tol: f64) -> Sparsified {
    let n = tree.n_leaves();
    let trace = TraceLengths::new(tree);
    let rows: Vec<(f64, Vec<Triplet>)> = exec::map_range(n, |r| {
        let v = tree.internal_node(r);
        let Some((s0, s1)) = trace.sides(tree, v) else {
            return (trace.aggregate(v).sum / n as f64, Vec::new());
        };
        let f = row_factors(s0.count, s1.count, s0.sum, s1.sum);
        (f.lambda, ancestor_entries(tree, v, r, f.a, drop_tol))
    });
    assemble(n, rows)
}

/// Entries `(r, rank(u))` for every proper ancestor `u` of `v`.
fn ancestor_entries(tree: &OrbTree, v: NodeId, r: usize, a: f64, drop_tol: f64) -> Vec<Triplet> {
    let mut out = Vec::with_capacity(tree.depth(v));
    let mut child = v;
    while let Some(u) = tree.parent(child) {
        let value = ancestor_weight(tree, u, child) * a;
        if value.abs() > drop_tol {
            out.push(Triplet {
                row: r,
                col: tree.internal_rank(u).unwrap(),
                value,
            });
        }
        child = u;
    }
    out
}

fn assemble(n: usize, rows: Vec<(f64, Vec<Triplet>)>) -> Sparsified {
    let mut lambda = Vec::with_capacity(n);
    let mut triplets = Vec::with_capacity(rows.iter().map(|r| r.1.len() + 1).sum());
    for (r, (l, entries)) in rows.into_iter().enumerate() {
        lambda.push(l);
        triplets.push(Triplet {
            row: r,
            col: r,
            value: l,
        });
        triplets.extend(entries);
    }
    Sparsified {
        matrix: SparseSymMatrix::from_sorted(n, triplets),
        lambda,
    }
}

/// Two passes over the internal nodes in postorder: the first materializes
/// `phi_v(i)` and `l*(i, v)` for every leaf `i` of `v`, the second forms each
/// entry as a sum over leaves.
fn reference(tree: &OrbTree, drop_tol: f64, mode: ReferenceMode) -> Result<Sparsified> {
    let n = tree.n_leaves();
    let work: usize = tree.internal_nodes().map(|v| tree.leaf_count(v)).sum();
    if work > REFERENCE_WORK_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: n * REFERENCE_WORK_LIMIT / work,
        });
    }

    // First pass: per node, phi_v and l*(., v) over L(v) in leaf order.
    let mut phi: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let node_star = |star: &Vec<Vec<f64>>, c: NodeId| -> Vec<f64> {
        let lift = tree.leaf_count(c) as f64 * tree.branch_length(c);
        match tree.internal_rank(c) {
            Some(rc) => star[rc].iter().map(|x| x + lift).collect(),
            None => vec![lift],
        }
    };
    for v in tree.internal_nodes() {
        match tree.children(v) {
            Children::Pair(a, b) => {
                let (pos, neg) = split_weights(tree.leaf_count(a), tree.leaf_count(b));
                let mut s = node_star(&star, a);
                s.extend(node_star(&star, b));
                let mut p = vec![pos; tree.leaf_count(a)];
                p.extend(std::iter::repeat_n(neg, tree.leaf_count(b)));
                phi.push(p);
                star.push(s);
            }
            Children::Single(c) => {
                star.push(node_star(&star, c));
                phi.push(vec![1.0 / (n as f64).sqrt(); n]);
            }
            Children::Leaf => unreachable!(),
        }
    }

    // Second pass: M(u, v) for u = v and every proper ancestor u.
    let mut rows = Vec::with_capacity(n);
    for (r, v) in tree.internal_nodes().enumerate() {
        let range = tree.leaf_range(v);
        let lv = &star[r];
        let pv = &phi[r];
        let entry = |u: NodeId| -> f64 {
            let ru = tree.internal_rank(u).unwrap();
            let off = range.start - tree.leaf_range(u).start;
            let pu = &phi[ru][off..off + range.len()];
            let mut acc = 0.0;
            for k in 0..range.len() {
                acc += pu[k] * pv[k] * lv[k];
            }
            acc
        };
        let (lambda, a) = match (mode, tree.children(v)) {
            (ReferenceMode::Literal, _) => (entry(v), None),
            (ReferenceMode::Factored, Children::Pair(c0, c1)) => {
                let n0 = tree.leaf_count(c0);
                let sum0: f64 = lv[..n0].iter().sum();
                let sum1: f64 = lv[n0..].iter().sum();
                let f = row_factors(n0, tree.leaf_count(c1), sum0, sum1);
                (f.lambda, Some(f.a))
            }
            (ReferenceMode::Factored, _) => (lv.iter().sum::<f64>() / n as f64, Some(0.0)),
        };
        let mut entries = Vec::new();
        let mut child = v;
        while let Some(u) = tree.parent(child) {
            let value = match a {
                Some(a) => ancestor_weight(tree, u, child) * a,
                None => entry(u),
            };
            if value.abs() > drop_tol {
                entries.push(Triplet {
                    row: r,
                    col: tree.internal_rank(u).unwrap(),
                    value,
                });
            }
            child = u;
        }
        rows.push((lambda, entries));
    }
    Ok(assemble(n, rows))
}

/// `Phi' S Phi` by dense matrix products.
pub fn dense_conjugate(matrix: &StrictUltrametricMatrix, basis: &HaarBasis) -> Result<DMatrix<f64>> {
    let n = matrix.dim();
    if n > CONJUGATE_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: CONJUGATE_LIMIT,
        });
    }
    if basis.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            found: basis.dim(),
        });
    }
    let phi = basis.to_dense()?;
    Ok(phi.transpose() * (matrix.entries() * &phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{haar_basis, observed_sparsity};
    use crate::tree::{parse_newick, NewickOptions};
    use crate::ultrametric::covariance_from_tree;

    fn three_leaf() -> OrbTree {
        parse_newick("((1:3,2:1):0,3:2):2;", &NewickOptions::default()).unwrap()
    }

    #[test]
    fn three_leaf_entries() {
        let t = three_leaf();
        let s = sparsify(&t, &SparsifyOptions::default()).unwrap();
        // ranks: 0 = {1,2}, 1 = eps, 2 = root
        assert_eq!(s.lambda, vec![2.0, 2.0, 8.0]);
        let m = &s.matrix;
        assert_eq!(m.stored(), 5);
        assert_eq!(m.get(1, 2), 0.0);
        assert!((m.get(0, 2) - 2.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((m.get(0, 1) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.trace(), 12.0);
        assert!((observed_sparsity(m) - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn three_leaf_matches_dense_oracle() {
        let t = three_leaf();
        let s = sparsify(&t, &SparsifyOptions::default()).unwrap();
        let dense = dense_conjugate(&covariance_from_tree(&t).unwrap(), &haar_basis(&t)).unwrap();
        let sparse = s.matrix.to_dense().unwrap();
        assert!((dense - sparse).amax() < 1e-14);
    }

    #[test]
    fn reference_modes_agree() {
        let t = parse_newick(
            "((((a:1,b:2):0.5,c:3):0.25,(d:1,e:0.5):1):2,f:4):1;",
            &NewickOptions::default(),
        )
        .unwrap();
        let fast = sparsify(&t, &SparsifyOptions::default()).unwrap();
        for mode in [ReferenceMode::Literal, ReferenceMode::Factored] {
            let opts = SparsifyOptions {
                method: Method::Reference(mode),
                ..Default::default()
            };
            let r = sparsify(&t, &opts).unwrap();
            let diff = r.matrix.to_dense().unwrap() - fast.matrix.to_dense().unwrap();
            assert!(diff.amax() < 1e-13, "{mode:?}");
        }
        let factored = sparsify(
            &t,
            &SparsifyOptions {
                method: Method::Reference(ReferenceMode::Factored),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(factored, fast);
    }

    #[test]
    fn drop_tolerance_removes_small_entries() {
        let t = three_leaf();
        let s = sparsify(
            &t,
            &SparsifyOptions {
                drop_tol: 0.7,
                ..Default::default()
            },
        )
        .unwrap();
        // 2/sqrt(6) ~ 0.816 survives, 1/sqrt(3) ~ 0.577 is dropped
        assert_eq!(s.matrix.stored(), 4);
    }
}
