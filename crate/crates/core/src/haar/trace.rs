use crate::tree::{Children, NodeId, OrbTree};

/// Count, sum and centered sum of squares of a set of values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Aggregate {
    pub count: usize,
    pub sum: f64,
    pub m2: f64,
}

impl Aggregate {
    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        self.m2 / self.count as f64
    }

    /// Every value shifted by `by`; `m2` is shift-invariant.
    pub fn shifted(&self, by: f64) -> Aggregate {
        Aggregate {
            count: self.count,
            sum: self.sum + self.count as f64 * by,
            m2: self.m2,
        }
    }

    /// Pooled statistics of two disjoint sets.
    pub fn merge(&self, other: &Aggregate) -> Aggregate {
        let (a, b) = (self.count as f64, other.count as f64);
        let gap = self.mean() - other.mean();
        Aggregate {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            m2: self.m2 + other.m2 + gap * gap * a * b / (a + b),
        }
    }
}

/// Trace branch lengths `l*(e) = |L(e)| l(e)` and, for every node `v`, the
/// statistics of `l*(i, v)` over its leaves `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLengths {
    edge: Vec<f64>,
    aggregates: Vec<Aggregate>,
}

impl TraceLengths {
    pub fn new(tree: &OrbTree) -> Self {
        let count = tree.node_count();
        let edge: Vec<f64> = tree
            .nodes()
            .map(|v| tree.leaf_count(v) as f64 * tree.branch_length(v))
            .collect();
        let mut aggregates = vec![Aggregate::default(); count];
        // Node ids are postorder, so children are always finished first.
        for v in tree.nodes() {
            aggregates[v.0] = match tree.children(v) {
                Children::Leaf => Aggregate {
                    count: 1,
                    sum: 0.0,
                    m2: 0.0,
                },
                Children::Single(c) => aggregates[c.0].shifted(edge[c.0]),
                Children::Pair(a, b) => aggregates[a.0]
                    .shifted(edge[a.0])
                    .merge(&aggregates[b.0].shifted(edge[b.0])),
            };
        }
        TraceLengths { edge, aggregates }
    }

    /// `l*` of the edge above `v` (0 at the root).
    pub fn edge(&self, v: NodeId) -> f64 {
        self.edge[v.0]
    }

    /// Statistics of `l*(i, v)` over `i` in `L(v)`.
    pub fn aggregate(&self, v: NodeId) -> Aggregate {
        self.aggregates[v.0]
    }

    /// Statistics of `l*(i, v)` over the leaves of each child of a binary
    /// node `v`.
    pub fn sides(&self, tree: &OrbTree, v: NodeId) -> Option<(Aggregate, Aggregate)> {
        match tree.children(v) {
            Children::Pair(a, b) => Some((
                self.aggregates[a.0].shifted(self.edge[a.0]),
                self.aggregates[b.0].shifted(self.edge[b.0]),
            )),
            _ => None,
        }
    }

    /// `l*(i, v)` for leaf index `i` in `L(v)`, accumulated from the leaf up.
    pub fn between(&self, tree: &OrbTree, leaf: usize, v: NodeId) -> Option<f64> {
        let mut cur = tree.leaf_node(leaf);
        if !tree.is_ancestor(v, cur) {
            return None;
        }
        let mut acc = 0.0;
        while cur != v {
            acc += self.edge[cur.0];
            cur = tree.parent(cur)?;
        }
        Some(acc)
    }
}
