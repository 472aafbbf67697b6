//! General rooted trees before ORB normalization, and the ORB rule checker.

use std::collections::HashSet;
use std::fmt;

/// Pendant edges at or below this length count as nonpositive.
pub const PENDANT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawNode {
    pub name: Option<String>,
    /// Length of the edge to the parent; `None` when unspecified.
    pub length: Option<f64>,
    pub children: Vec<usize>,
}

/// An arbitrary rooted tree as read from Newick or assembled by hand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTree {
    pub nodes: Vec<RawNode>,
    pub root: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RootDegree { children: usize },
    NodeDegree { node: usize, children: usize },
    PendantNonPositive { node: usize, length: Option<f64> },
    NegativeLength { node: usize, length: f64 },
    NonFiniteLength { node: usize },
    UnlabeledLeaf { node: usize },
    DuplicateLabel { label: String },
    CountMismatch { leaves: usize, internal: usize },
    LeafCount { node: usize },
    LeafRange { node: usize },
    Cycle { node: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RootDegree { children } => {
                write!(f, "root has {children} children, expected 1")
            }
            Violation::NodeDegree { node, children } => write!(
                f,
                "degree violation: node {node} has {children} children, expected 0 or 2"
            ),
            Violation::PendantNonPositive { node, length } => match length {
                Some(l) => write!(f, "pendant edge nonpositive: node {node} has length {l}"),
                None => write!(f, "pendant edge nonpositive: node {node} has no length"),
            },
            Violation::NegativeLength { node, length } => {
                write!(f, "negative branch length {length} at node {node}")
            }
            Violation::NonFiniteLength { node } => {
                write!(f, "non-finite branch length at node {node}")
            }
            Violation::UnlabeledLeaf { node } => write!(f, "leaf {node} has no label"),
            Violation::DuplicateLabel { label } => write!(f, "duplicate leaf label {label:?}"),
            Violation::CountMismatch { leaves, internal } => write!(
                f,
                "leaf/internal count mismatch: {leaves} leaves, {internal} internal nodes"
            ),
            Violation::LeafCount { node } => write!(f, "leaf count inconsistent at node {node}"),
            Violation::LeafRange { node } => write!(f, "leaf range inconsistent at node {node}"),
            Violation::Cycle { node } => write!(f, "node {node} reachable twice"),
        }
    }
}

/// Every violated ORB invariant; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl RawTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: Option<String>, length: Option<f64>) -> usize {
        self.nodes.push(RawNode {
            name,
            length,
            children: Vec::new(),
        });
        self.nodes.len() - 1
    }

    pub fn add_child(&mut self, parent: usize, name: Option<String>, length: Option<f64>) -> usize {
        let id = self.add_node(name, length);
        self.nodes[parent].children.push(id);
        id
    }

    /// Node ids in postorder (children left to right, then the parent).
    /// Returns `None` if some node is reachable twice.
    pub fn postorder(&self) -> Option<Vec<usize>> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, 0usize)];
        if self.root >= self.nodes.len() {
            return None;
        }
        seen[self.root] = true;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&c) = self.nodes[v].children.get(*next) {
                *next += 1;
                if c >= self.nodes.len() || seen[c] {
                    return None;
                }
                seen[c] = true;
                stack.push((c, 0));
            } else {
                order.push(v);
                stack.pop();
            }
        }
        Some(order)
    }

    /// Check the ORB-tree rules: root of degree 1, every other vertex of
    /// degree 1 or 3, strictly positive labeled pendant edges, nonnegative
    /// internal edges and equal numbers of leaves and internal nodes.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let order = match self.postorder() {
            Some(o) => o,
            None => {
                report.push(Violation::Cycle { node: self.root });
                return report;
            }
        };
        let root = &self.nodes[self.root];
        if root.children.len() != 1 {
            report.push(Violation::RootDegree {
                children: root.children.len(),
            });
        }
        let mut leaves = 0usize;
        let mut internal = 0usize;
        let mut labels = HashSet::new();
        for &v in &order {
            let node = &self.nodes[v];
            let is_leaf = node.children.is_empty() && v != self.root;
            if is_leaf {
                leaves += 1;
                match node.length {
                    Some(l) if !l.is_finite() => report.push(Violation::NonFiniteLength { node: v }),
                    Some(l) if l > PENDANT_TOLERANCE => {}
                    other => report.push(Violation::PendantNonPositive {
                        node: v,
                        length: other,
                    }),
                }
                match &node.name {
                    Some(name) if !name.is_empty() => {
                        if !labels.insert(name.as_str()) {
                            report.push(Violation::DuplicateLabel {
                                label: name.clone(),
                            });
                        }
                    }
                    _ => report.push(Violation::UnlabeledLeaf { node: v }),
                }
            } else {
                internal += 1;
                if v != self.root {
                    if node.children.len() != 2 {
                        report.push(Violation::NodeDegree {
                            node: v,
                            children: node.children.len(),
                        });
                    }
                    match node.length {
                        Some(l) if !l.is_finite() => {
                            report.push(Violation::NonFiniteLength { node: v })
                        }
                        Some(l) if l < 0.0 => {
                            report.push(Violation::NegativeLength { node: v, length: l })
                        }
                        _ => {}
                    }
                }
            }
        }
        if leaves != internal {
            report.push(Violation::CountMismatch { leaves, internal });
        }
        report
    }
}
