//! ORB-trees: rooted binary trees whose root has a single child.
//!
//! Nodes are stored in postorder, so the root is always the last node and
//! every node's descendants occupy a contiguous block of ids just before it.
//! Leaves are numbered by their postorder position as well, which makes the
//! leaf set `L(v)` of any node an interval of leaf indices.

use std::ops::Range;

use crate::{Error, Result};

mod build;
mod newick;
mod random;
mod raw;
mod stats;

pub use build::{build_caterpillar, build_perfect_binary};
pub use newick::{parse_newick, parse_newick_raw, write_newick, NewickOptions};
pub use random::{random_orb_tree, LengthLaw};
pub use raw::{RawNode, RawTree, ValidationReport, Violation, PENDANT_TOLERANCE};
pub use stats::{tree_stats, TreeStats};

/// Index of a vertex in an [`OrbTree`]; equal to its postorder position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Children {
    Leaf,
    /// The root's only child.
    Single(NodeId),
    Pair(NodeId, NodeId),
}

const NONE: usize = usize::MAX;

/// An immutable out-rooted bifurcating tree with precomputed leaf intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbTree {
    parent: Vec<usize>,
    children: Vec<[usize; 2]>,
    length: Vec<f64>,
    depth: Vec<usize>,
    leaf_count: Vec<usize>,
    leaf_start: Vec<usize>,
    /// Leaf index or internal rank, depending on the node kind.
    rank: Vec<usize>,
    leaf_nodes: Vec<usize>,
    internal_nodes: Vec<usize>,
    labels: Vec<String>,
}

impl OrbTree {
    /// Build from a general tree, rejecting anything that is not an ORB-tree.
    /// Unspecified internal lengths become 0.
    pub fn from_raw(raw: &RawTree) -> Result<Self> {
        let report = raw.validate();
        if !report.is_empty() {
            return Err(Error::InvalidTree(report));
        }
        let order = raw.postorder().expect("validated tree is acyclic");
        let total = order.len();
        let mut new_id = vec![NONE; raw.nodes.len()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }

        let mut tree = OrbTree {
            parent: vec![NONE; total],
            children: vec![[NONE, NONE]; total],
            length: vec![0.0; total],
            depth: vec![0; total],
            leaf_count: vec![0; total],
            leaf_start: vec![0; total],
            rank: vec![0; total],
            leaf_nodes: Vec::with_capacity(total / 2),
            internal_nodes: Vec::with_capacity(total / 2),
            labels: Vec::with_capacity(total / 2),
        };

        for (i, &v) in order.iter().enumerate() {
            let node = &raw.nodes[v];
            if v != raw.root {
                tree.length[i] = node.length.unwrap_or(0.0);
            }
            if node.children.is_empty() {
                tree.rank[i] = tree.leaf_nodes.len();
                tree.leaf_start[i] = tree.leaf_nodes.len();
                tree.leaf_count[i] = 1;
                tree.leaf_nodes.push(i);
                tree.labels.push(node.name.clone().unwrap_or_default());
            } else {
                tree.rank[i] = tree.internal_nodes.len();
                tree.internal_nodes.push(i);
                let mut count = 0;
                for (slot, &c) in node.children.iter().enumerate() {
                    let c = new_id[c];
                    tree.children[i][slot] = c;
                    tree.parent[c] = i;
                    count += tree.leaf_count[c];
                }
                tree.leaf_count[i] = count;
                tree.leaf_start[i] = tree.leaf_start[tree.children[i][0]];
            }
        }
        for i in (0..total).rev() {
            if tree.parent[i] != NONE {
                tree.depth[i] = tree.depth[tree.parent[i]] + 1;
            }
        }
        Ok(tree)
    }

    /// Convert back to a [`RawTree`] whose node ids match this tree's.
    pub fn to_raw(&self) -> RawTree {
        let mut raw = RawTree {
            nodes: vec![RawNode::default(); self.node_count()],
            root: self.root().0,
        };
        for v in 0..self.node_count() {
            let node = &mut raw.nodes[v];
            if v != raw.root {
                node.length = Some(self.length[v]);
            }
            node.children = self.children[v].iter().copied().filter(|&c| c != NONE).collect();
            if node.children.is_empty() {
                node.name = Some(self.labels[self.rank[v]].clone());
            }
        }
        raw
    }

    /// Same topology and labels with new branch lengths, indexed by node id
    /// (the root entry is ignored).
    pub fn with_branch_lengths(&self, lengths: &[f64]) -> Result<Self> {
        if lengths.len() != self.node_count() {
            return Err(Error::Dimension {
                expected: self.node_count(),
                found: lengths.len(),
            });
        }
        let mut raw = self.to_raw();
        for (v, node) in raw.nodes.iter_mut().enumerate() {
            if v != raw.root {
                node.length = Some(lengths[v]);
            }
        }
        OrbTree::from_raw(&raw)
    }

    /// Re-check every structural invariant of the built tree.
    pub fn validate(&self) -> ValidationReport {
        let mut report = self.to_raw().validate();
        for v in 0..self.node_count() {
            match self.children(NodeId(v)) {
                Children::Leaf => {
                    if self.leaf_count[v] != 1 {
                        report.push(Violation::LeafCount { node: v });
                    }
                    if self.leaf_nodes[self.leaf_start[v]] != v {
                        report.push(Violation::LeafRange { node: v });
                    }
                }
                Children::Single(c) => {
                    if self.leaf_count[v] != self.leaf_count[c.0]
                        || self.leaf_start[v] != self.leaf_start[c.0]
                    {
                        report.push(Violation::LeafCount { node: v });
                    }
                }
                Children::Pair(a, b) => {
                    if self.leaf_count[v] != self.leaf_count[a.0] + self.leaf_count[b.0] {
                        report.push(Violation::LeafCount { node: v });
                    }
                    if self.leaf_start[v] != self.leaf_start[a.0]
                        || self.leaf_start[b.0] != self.leaf_start[a.0] + self.leaf_count[a.0]
                    {
                        report.push(Violation::LeafRange { node: v });
                    }
                }
            }
        }
        if self.leaf_count[self.root().0] != self.n_leaves() {
            report.push(Violation::LeafCount { node: self.root().0 });
        }
        report
    }

    /// Number of leaves `n`, which equals the number of internal nodes.
    pub fn n_leaves(&self) -> usize {
        self.leaf_nodes.len()
    }

    pub fn n_internal(&self) -> usize {
        self.internal_nodes.len()
    }

    /// `|V| = 2n`.
    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> NodeId {
        NodeId(self.parent.len() - 1)
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v.0][0] == NONE
    }

    pub fn is_root(&self, v: NodeId) -> bool {
        self.parent[v.0] == NONE
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        match self.parent[v.0] {
            NONE => None,
            p => Some(NodeId(p)),
        }
    }

    pub fn children(&self, v: NodeId) -> Children {
        match self.children[v.0] {
            [NONE, _] => Children::Leaf,
            [c, NONE] => Children::Single(NodeId(c)),
            [a, b] => Children::Pair(NodeId(a), NodeId(b)),
        }
    }

    /// Length of the edge from `v` to its parent (0 for the root).
    pub fn branch_length(&self, v: NodeId) -> f64 {
        self.length[v.0]
    }

    /// Branch lengths indexed by node id.
    pub fn branch_lengths(&self) -> &[f64] {
        &self.length
    }

    /// Number of edges between `v` and the root.
    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v.0]
    }

    /// `|L(v)|`.
    pub fn leaf_count(&self, v: NodeId) -> usize {
        self.leaf_count[v.0]
    }

    /// `L(v)` as an interval of leaf indices.
    pub fn leaf_range(&self, v: NodeId) -> Range<usize> {
        let s = self.leaf_start[v.0];
        s..s + self.leaf_count[v.0]
    }

    pub fn leaf_node(&self, leaf: usize) -> NodeId {
        NodeId(self.leaf_nodes[leaf])
    }

    pub fn leaf_label(&self, leaf: usize) -> &str {
        &self.labels[leaf]
    }

    pub fn leaf_labels(&self) -> &[String] {
        &self.labels
    }

    /// Leaf index of a leaf node.
    pub fn leaf_index(&self, v: NodeId) -> Option<usize> {
        self.is_leaf(v).then(|| self.rank[v.0])
    }

    /// Internal node with the given postorder rank among internal nodes.
    pub fn internal_node(&self, rank: usize) -> NodeId {
        NodeId(self.internal_nodes[rank])
    }

    /// Postorder rank of an internal node (the root has rank `n - 1`).
    pub fn internal_rank(&self, v: NodeId) -> Option<usize> {
        (!self.is_leaf(v)).then(|| self.rank[v.0])
    }

    /// Internal nodes in postorder.
    pub fn internal_nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.internal_nodes.iter().map(|&v| NodeId(v))
    }

    /// Every node in postorder.
    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId)
    }

    /// True when `u` lies on the path from `v` to the root (including `u == v`).
    pub fn is_ancestor(&self, u: NodeId, v: NodeId) -> bool {
        let (ru, rv) = (self.leaf_range(u), self.leaf_range(v));
        ru.start <= rv.start && rv.end <= ru.end && self.depth[u.0] <= self.depth[v.0]
    }

    /// Sum of branch lengths from `v` up to the root, for every node.
    pub fn root_distances(&self) -> Vec<f64> {
        let mut dist = vec![0.0; self.node_count()];
        for v in (0..self.node_count()).rev() {
            if self.parent[v] != NONE {
                dist[v] = dist[self.parent[v]] + self.length[v];
            }
        }
        dist
    }

    /// Sum of all branch lengths.
    pub fn total_length(&self) -> f64 {
        self.length.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn three_leaf() -> OrbTree {
        parse_newick("((1:3,2:1):0,3:2):2;", &NewickOptions::default()).unwrap()
    }

    #[test]
    fn three_leaf_structure() {
        let t = three_leaf();
        assert_eq!(t.n_leaves(), 3);
        assert_eq!(t.node_count(), 6);
        let root = t.root();
        assert!(t.is_root(root));
        let eps = match t.children(root) {
            Children::Single(c) => c,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(t.branch_length(eps), 2.0);
        assert_eq!(t.leaf_count(eps), 3);
        let labels: Vec<_> = t.leaf_labels().to_vec();
        assert_eq!(labels, vec!["1", "2", "3"]);
        // internal postorder: {1,2}, eps, root
        assert_eq!(t.leaf_range(t.internal_node(0)), 0..2);
        assert_eq!(t.internal_node(1), eps);
        assert_eq!(t.internal_node(2), root);
        assert!(t.validate().is_empty());
    }

    #[test]
    fn ancestry_uses_intervals() {
        let t = three_leaf();
        let root = t.root();
        let eps = t.internal_node(1);
        let v12 = t.internal_node(0);
        assert!(t.is_ancestor(root, eps));
        assert!(!t.is_ancestor(eps, root));
        assert!(t.is_ancestor(eps, v12));
        assert!(t.is_ancestor(v12, t.leaf_node(1)));
        assert!(!t.is_ancestor(v12, t.leaf_node(2)));
        assert!(!t.is_ancestor(t.leaf_node(0), t.leaf_node(1)));
    }

    #[test]
    fn lengths_can_be_replaced() {
        let t = three_leaf();
        let mut lengths = t.branch_lengths().to_vec();
        lengths[t.leaf_node(0).0] = 0.0;
        assert!(matches!(t.with_branch_lengths(&lengths), Err(Error::InvalidTree(_))));
        lengths[t.leaf_node(0).0] = 9.0;
        let u = t.with_branch_lengths(&lengths).unwrap();
        assert_eq!(u.branch_length(u.leaf_node(0)), 9.0);
    }
}
