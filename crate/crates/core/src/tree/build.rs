//! Deterministic tree families: perfect binary trees and caterpillars.
//! Leaves are labeled `1..=n` in postorder.

use super::{OrbTree, RawTree};
use crate::{Error, Result};

/// Perfect binary ORB-tree with `2^h` leaves.
///
/// `level_lengths[j]` is the length of every edge joining a node at depth `j`
/// to a child at depth `j + 1`; entry 0 is the root edge and entry `h` the
/// pendant edges.
pub fn build_perfect_binary(h: usize, level_lengths: &[f64]) -> Result<OrbTree> {
    if h == 0 {
        return Err(Error::arg("perfect binary tree needs height h >= 1"));
    }
    if h >= usize::BITS as usize - 2 {
        return Err(Error::arg(format!("height {h} is too large")));
    }
    if level_lengths.len() != h + 1 {
        return Err(Error::Dimension {
            expected: h + 1,
            found: level_lengths.len(),
        });
    }
    let mut raw = RawTree::new();
    let root = raw.add_node(None, None);
    let mut frontier = vec![raw.add_child(root, None, Some(level_lengths[0]))];
    for depth in 2..=h {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for &v in &frontier {
            next.push(raw.add_child(v, None, Some(level_lengths[depth - 1])));
            next.push(raw.add_child(v, None, Some(level_lengths[depth - 1])));
        }
        frontier = next;
    }
    let mut label = 0;
    for &v in &frontier {
        for _ in 0..2 {
            label += 1;
            raw.add_child(v, Some(label.to_string()), Some(level_lengths[h]));
        }
    }
    OrbTree::from_raw(&raw)
}

/// Binary caterpillar of height `h`: a spine `◦, 1, ..., h` where spine
/// node `j < h` also carries a pendant leaf `j'`.
///
/// `spine_lengths[j]` is the length of edge `{j, j+1}` (with `j = 0` the root
/// edge), so it has `h` entries and the last one is the pendant edge of leaf
/// `h`. `pendant_lengths[j-1]` is the length of edge `{j, j'}` for
/// `j = 1..h-1`. The pendant leaf is the first child of each spine node.
pub fn build_caterpillar(h: usize, spine_lengths: &[f64], pendant_lengths: &[f64]) -> Result<OrbTree> {
    if h == 0 {
        return Err(Error::arg("caterpillar needs height h >= 1"));
    }
    if spine_lengths.len() != h {
        return Err(Error::Dimension {
            expected: h,
            found: spine_lengths.len(),
        });
    }
    if pendant_lengths.len() != h - 1 {
        return Err(Error::Dimension {
            expected: h - 1,
            found: pendant_lengths.len(),
        });
    }
    let mut raw = RawTree::new();
    let root = raw.add_node(None, None);
    let mut spine = root;
    for j in 1..h {
        let node = raw.add_child(spine, None, Some(spine_lengths[j - 1]));
        raw.add_child(node, Some(j.to_string()), Some(pendant_lengths[j - 1]));
        spine = node;
    }
    raw.add_child(spine, Some(h.to_string()), Some(spine_lengths[h - 1]));
    OrbTree::from_raw(&raw)
}
