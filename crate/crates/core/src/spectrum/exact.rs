use super::balance::balance_report;
use crate::haar::TraceLengths;
use crate::tree::{OrbTree, PENDANT_TOLERANCE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub value: f64,
    pub multiplicity: usize,
}

/// Spectrum of the covariance matrix of a trace-balanced tree, in
/// decreasing order. Each internal node contributes the common value of
/// `l*(i, v)` over its leaves.
///
/// When every branch length is an integer all values are exact and equal
/// values merge by equality; otherwise values within `tol * (1 + |x|)` of a
/// group's largest member merge.
pub fn exact_spectrum(tree: &OrbTree, tol: f64) -> Result<Vec<SpectrumEntry>> {
    let report = balance_report(tree, tol);
    if let Some(rank) = report.first_violation() {
        let b = report.nodes[rank];
        return Err(Error::NotTraceBalanced {
            rank,
            gap: (b.mean_left - b.mean_right).abs(),
            spread: b.var_left.max(b.var_right).sqrt(),
        });
    }
    let trace = TraceLengths::new(tree);
    let mut values: Vec<f64> = tree.internal_nodes().map(|v| trace.aggregate(v).mean()).collect();
    values.sort_by(|a, b| b.total_cmp(a));

    let integral = tree.branch_lengths().iter().all(|x| x.fract() == 0.0);
    let mut out: Vec<SpectrumEntry> = Vec::new();
    let mut head = f64::NAN;
    for x in values {
        let same = match out.last() {
            None => false,
            Some(_) if integral => x == head,
            Some(_) => head - x <= tol * (1.0 + head.abs()),
        };
        if same {
            out.last_mut().unwrap().multiplicity += 1;
        } else {
            head = x;
            out.push(SpectrumEntry { value: x, multiplicity: 1 });
        }
    }
    Ok(out)
}

/// Branch lengths on the topology of `tree` that make it trace-balanced with
/// `l*(v, i) = f[rank(v)]`, hence with spectrum `f`.
///
/// `f` must be nonnegative, non-increasing from each node to its children,
/// and positive at every parent of a leaf.
pub fn lengths_from_spectrum(tree: &OrbTree, f: &[f64]) -> Result<OrbTree> {
    let n = tree.n_internal();
    if f.len() != n {
        return Err(Error::Dimension { expected: n, found: f.len() });
    }
    if let Some(r) = f.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::arg(format!("spectrum value at internal node {r} must be finite and nonnegative")));
    }
    let mut lengths = vec![0.0; tree.node_count()];
    for v in tree.nodes() {
        let Some(u) = tree.parent(v) else {
            continue;
        };
        let fu = f[tree.internal_rank(u).unwrap()];
        lengths[v.0] = match tree.internal_rank(v) {
            None => {
                if fu <= PENDANT_TOLERANCE {
                    return Err(Error::arg(format!(
                        "spectrum value {fu} at internal node {} is not positive at the fringe",
                        tree.internal_rank(u).unwrap()
                    )));
                }
                fu
            }
            Some(rv) => {
                if f[rv] > fu {
                    return Err(Error::arg(format!(
                        "spectrum is not decreasing: node {rv} has {} above its parent's {fu}",
                        f[rv]
                    )));
                }
                (fu - f[rv]) / tree.leaf_count(v) as f64
            }
        };
    }
    tree.with_branch_lengths(&lengths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_caterpillar, build_perfect_binary, parse_newick, NewickOptions};

    fn pairs(s: &[SpectrumEntry]) -> Vec<(f64, usize)> {
        s.iter().map(|e| (e.value, e.multiplicity)).collect()
    }

    #[test]
    fn eight_leaf_perfect_binary() {
        let (le, l0, l00, l000) = (1.0, 2.0, 3.0, 5.0);
        let t = build_perfect_binary(3, &[le, l0, l00, l000]).unwrap();
        let s = exact_spectrum(&t, 1e-9).unwrap();
        assert_eq!(
            pairs(&s),
            vec![
                (l000 + 2.0 * l00 + 4.0 * l0 + 8.0 * le, 1),
                (l000 + 2.0 * l00 + 4.0 * l0, 1),
                (l000 + 2.0 * l00, 2),
                (l000, 4),
            ]
        );
    }

    #[test]
    fn unbalanced_tree_is_rejected() {
        let t = parse_newick("((1:3,2:1):0,3:2):2;", &NewickOptions::default()).unwrap();
        assert!(matches!(exact_spectrum(&t, 1e-9), Err(Error::NotTraceBalanced { rank: 0, .. })));
    }

    #[test]
    fn cherry_from_spectrum() {
        let t = build_perfect_binary(1, &[0.0, 1.0]).unwrap();
        let u = lengths_from_spectrum(&t, &[1.0, 1.0]).unwrap();
        assert_eq!(u.branch_lengths(), &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(pairs(&exact_spectrum(&u, 1e-9).unwrap()), vec![(1.0, 2)]);
    }

    #[test]
    fn spectrum_preconditions() {
        let t = build_caterpillar(3, &[1.0, 1.0, 1.0], &[1.0, 1.0]).unwrap();
        // ranks: 0 = deepest spine node, 2 = root
        assert!(lengths_from_spectrum(&t, &[3.0, 2.0, 1.0]).is_err());
        assert!(lengths_from_spectrum(&t, &[0.0, 2.0, 3.0]).is_err());
        assert!(lengths_from_spectrum(&t, &[1.0, 2.0]).is_err());
        let u = lengths_from_spectrum(&t, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(pairs(&exact_spectrum(&u, 1e-9).unwrap()), vec![(3.0, 1), (2.0, 1), (1.0, 1)]);
    }
}
