use crate::exec;
use crate::haar::{Aggregate, TraceLengths};
use crate::tree::{NodeId, OrbTree};

pub const DEFAULT_BALANCE_TOL: f64 = 1e-9;

/// Statistics of `l*(i, v)` on the two halves of `L(v)`.
///
/// For the root, which has a single child, the "left" half is all of `L`
/// and the right half is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeBalance {
    pub node: NodeId,
    pub lambda: f64,
    pub is_balanced: bool,
    pub mean_left: f64,
    pub mean_right: f64,
    pub var_left: f64,
    pub var_right: f64,
    pub rho_left: f64,
    pub rho_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    /// Indexed by internal rank.
    pub nodes: Vec<NodeBalance>,
    /// Balanced at every non-root internal node.
    pub is_balanced: bool,
}

impl BalanceReport {
    /// First unbalanced non-root internal node, by rank.
    pub fn first_violation(&self) -> Option<usize> {
        let last = self.nodes.len().saturating_sub(1);
        self.nodes[..last].iter().position(|b| !b.is_balanced)
    }
}

fn node_balance(tree: &OrbTree, trace: &TraceLengths, v: NodeId, tol: f64) -> NodeBalance {
    let scale = |lambda: f64| tol * (1.0 + lambda.abs());
    match trace.sides(tree, v) {
        Some((a, b)) => {
            let n = (a.count + b.count) as f64;
            let (rho0, rho1) = (a.count as f64 / n, b.count as f64 / n);
            let (m0, m1) = (a.mean(), b.mean());
            let lambda = rho1 * m0 + rho0 * m1;
            let s = scale(lambda);
            NodeBalance {
                node: v,
                lambda,
                is_balanced: (m0 - m1).abs() <= s && a.variance().sqrt() <= s && b.variance().sqrt() <= s,
                mean_left: m0,
                mean_right: m1,
                var_left: a.variance(),
                var_right: b.variance(),
                rho_left: rho0,
                rho_right: rho1,
            }
        }
        None => {
            let all: Aggregate = trace.aggregate(v);
            let lambda = all.mean();
            NodeBalance {
                node: v,
                lambda,
                is_balanced: all.variance().sqrt() <= scale(lambda),
                mean_left: lambda,
                mean_right: 0.0,
                var_left: all.variance(),
                var_right: 0.0,
                rho_left: 1.0,
                rho_right: 0.0,
            }
        }
    }
}

/// Per-node trace-balance statistics. A node is balanced when the gap
/// between the two side means and both side standard deviations are at most
/// `tol * (1 + |lambda_v|)`.
pub fn balance_report(tree: &OrbTree, tol: f64) -> BalanceReport {
    let trace = TraceLengths::new(tree);
    let nodes = exec::map_range(tree.n_internal(), |r| node_balance(tree, &trace, tree.internal_node(r), tol));
    let is_balanced = nodes[..nodes.len() - 1].iter().all(|b| b.is_balanced);
    BalanceReport { nodes, is_balanced }
}

/// How well `lambda_v` approximates an eigenvalue of the covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenEstimate {
    pub node: NodeId,
    pub lambda: f64,
    /// `||(S - lambda_v) phi_v||_2`, an upper bound on the distance from
    /// `lambda_v` to the spectrum.
    pub error_bound: f64,
    /// Cosine between `S phi_v` and `lambda_v phi_v`.
    pub cosine: f64,
}

impl From<&NodeBalance> for EigenEstimate {
    fn from(b: &NodeBalance) -> Self {
        let sq = if b.rho_right == 0.0 {
            // Root: the wavelet is constant and the residual is the spread.
            b.var_left
        } else {
            let gap = b.mean_right - b.mean_left;
            b.rho_left * b.rho_right * gap * gap + b.rho_right * b.var_left + b.rho_left * b.var_right
        };
        let error_bound = sq.max(0.0).sqrt();
        let ratio = error_bound / b.lambda;
        EigenEstimate {
            node: b.node,
            lambda: b.lambda,
            error_bound,
            cosine: 1.0 / (1.0 + ratio * ratio).sqrt(),
        }
    }
}

/// Eigenvalue estimates for every internal node, by rank, computed from
/// subtree aggregates only.
pub fn eigen_estimates(tree: &OrbTree) -> Vec<EigenEstimate> {
    balance_report(tree, DEFAULT_BALANCE_TOL).nodes.iter().map(EigenEstimate::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_caterpillar, parse_newick, NewickOptions};

    #[test]
    fn three_leaf_node_12() {
        let t = parse_newick("((1:3,2:1):0,3:2):2;", &NewickOptions::default()).unwrap();
        let rep = balance_report(&t, DEFAULT_BALANCE_TOL);
        let b = rep.nodes[0];
        assert!(!b.is_balanced);
        assert_eq!((b.mean_left, b.mean_right, b.lambda), (3.0, 1.0, 2.0));
        assert_eq!((b.rho_left, b.rho_right), (0.5, 0.5));
        let e = eigen_estimates(&t)[0];
        assert_eq!(e.error_bound, 1.0);
        assert!((e.cosine - 1.0 / 1.25f64.sqrt()).abs() < 1e-15);
        assert!(!rep.is_balanced);
        assert_eq!(rep.first_violation(), Some(0));
    }

    #[test]
    fn balanced_caterpillar() {
        let (l0, l1, l2, l3) = (1.0, 2.0, 0.5, 1.5);
        let t = build_caterpillar(4, &[l0, l1, l2, l3], &[l3 + 2.0 * l2 + 3.0 * l1, l3 + 2.0 * l2, l3]).unwrap();
        let rep = balance_report(&t, DEFAULT_BALANCE_TOL);
        assert!(rep.is_balanced);
        for e in eigen_estimates(&t) {
            assert_eq!(e.error_bound, 0.0);
            assert_eq!(e.cosine, 1.0);
        }
    }

    #[test]
    fn equal_cherry_is_balanced() {
        let t = parse_newick("((a:2,b:2):1,c:1);", &NewickOptions::default()).unwrap();
        let rep = balance_report(&t, DEFAULT_BALANCE_TOL);
        assert!(rep.nodes[0].is_balanced);
    }
}
