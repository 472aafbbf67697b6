//! Newick reading and writing.
//!
//! Accepted syntax: nested parentheses, optional (possibly single-quoted)
//! node names, optional `:length` suffixes, `[...]` comments anywhere between
//! tokens, and a terminating `;`. Both reader and writer are iterative, so
//! arbitrarily deep trees do not overflow the stack.

use super::{Children, NodeId, OrbTree, RawTree};
use crate::fmt::g17;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NewickOptions {
    /// Resolve nodes with more than two children left-deep, inserting
    /// zero-length internal edges. Otherwise such nodes are rejected.
    pub binarize: bool,
}

struct Lexer<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Newick {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_trivia(&mut self) -> Result<()> {
        loop {
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.peek() == Some(b'[') {
                let start = self.pos;
                match self.text[self.pos..].iter().position(|&b| b == b']') {
                    Some(off) => self.pos += off + 1,
                    None => {
                        self.pos = start;
                        return self.err("unterminated comment");
                    }
                }
            } else {
                return Ok(());
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn label(&mut self) -> Result<Option<String>> {
        self.skip_trivia()?;
        match self.peek() {
            Some(b'\'') => {
                let start = self.pos;
                self.pos += 1;
                let mut out = Vec::new();
                loop {
                    match self.peek() {
                        None => {
                            self.pos = start;
                            return self.err("unterminated quoted label");
                        }
                        Some(b'\'') if self.text.get(self.pos + 1) == Some(&b'\'') => {
                            out.push(b'\'');
                            self.pos += 2;
                        }
                        Some(b'\'') => {
                            self.pos += 1;
                            break;
                        }
                        Some(b) => {
                            out.push(b);
                            self.pos += 1;
                        }
                    }
                }
                match String::from_utf8(out) {
                    Ok(s) => Ok(Some(s)),
                    Err(_) => self.err("label is not valid UTF-8"),
                }
            }
            _ => {
                let start = self.pos;
                while let Some(b) = self.peek() {
                    if is_delimiter(b) {
                        break;
                    }
                    self.pos += 1;
                }
                if start == self.pos {
                    return Ok(None);
                }
                match std::str::from_utf8(&self.text[start..self.pos]) {
                    Ok(s) => Ok(Some(s.to_string())),
                    Err(_) => self.err("label is not valid UTF-8"),
                }
            }
        }
    }

    fn length(&mut self) -> Result<Option<f64>> {
        self.skip_trivia()?;
        if self.peek() != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip_trivia()?;
        let start = self.pos;
        while let Some(b) = self.peek() {
            if is_delimiter(b) {
                break;
            }
            self.pos += 1;
        }
        let token = std::str::from_utf8(&self.text[start..self.pos]).unwrap_or("");
        match token.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => {
                self.pos = start;
                self.err(format!("invalid branch length {token:?}"))
            }
        }
    }
}

fn is_delimiter(b: u8) -> bool {
    b.is_ascii_whitespace() || matches!(b, b'(' | b')' | b',' | b':' | b';' | b'[' | b']' | b'\'')
}

/// Parse Newick text literally, without any ORB normalization.
pub fn parse_newick_raw(text: &str) -> Result<RawTree> {
    let mut lx = Lexer {
        text: text.as_bytes(),
        pos: 0,
    };
    let mut tree = RawTree::new();
    // Stack of open internal nodes; each `(` pushes a fresh node.
    let mut open: Vec<usize> = Vec::new();
    lx.skip_trivia()?;
    let root;
    loop {
        lx.skip_trivia()?;
        match lx.peek() {
            Some(b'(') => {
                lx.pos += 1;
                let id = tree.add_node(None, None);
                if let Some(&p) = open.last() {
                    tree.nodes[p].children.push(id);
                }
                open.push(id);
                continue;
            }
            None => return lx.err("unexpected end of input"),
            _ => {}
        }
        // A leaf (or an empty child slot, which Newick treats as an unnamed leaf).
        if open.is_empty() {
            // Bare `name;` with no parentheses.
            let name = lx.label()?;
            let length = lx.length()?;
            root = tree.add_node(name, length);
            break;
        }
        let name = lx.label()?;
        let length = lx.length()?;
        let id = tree.add_node(name, length);
        let p = *open.last().unwrap();
        tree.nodes[p].children.push(id);

        // Close any finished groups.
        let mut closed_root = None;
        loop {
            lx.skip_trivia()?;
            match lx.peek() {
                Some(b',') => {
                    lx.pos += 1;
                    break;
                }
                Some(b')') => {
                    lx.pos += 1;
                    let node = open.pop().unwrap();
                    let name = lx.label()?;
                    let length = lx.length()?;
                    tree.nodes[node].name = name;
                    tree.nodes[node].length = length;
                    if open.is_empty() {
                        closed_root = Some(node);
                        break;
                    }
                }
                Some(b) => return lx.err(format!("unexpected character {:?}", b as char)),
                None => return lx.err("unexpected end of input"),
            }
        }
        if let Some(r) = closed_root {
            root = r;
            break;
        }
    }
    lx.skip_trivia()?;
    if lx.peek() != Some(b';') {
        return lx.err("expected ';'");
    }
    lx.pos += 1;
    lx.skip_trivia()?;
    if lx.pos != lx.text.len() {
        return lx.err("trailing characters after ';'");
    }
    tree.root = root;
    Ok(tree)
}

/// Parse Newick text into an [`OrbTree`].
///
/// A top-level node with one child is taken to be the root itself. A
/// top-level node with two children is the root's child: a new root is
/// attached above it, and the top-level `:length` (0 if absent) becomes the
/// root edge.
pub fn parse_newick(text: &str, options: &NewickOptions) -> Result<OrbTree> {
    let mut raw = parse_newick_raw(text)?;
    normalize(&mut raw, options)?;
    OrbTree::from_raw(&raw)
}

fn normalize(raw: &mut RawTree, options: &NewickOptions) -> Result<()> {
    let top = raw.root;
    if raw.nodes[top].children.is_empty() {
        return Err(Error::Newick {
            position: 0,
            message: "tree has no internal node".into(),
        });
    }
    for v in 0..raw.nodes.len() {
        let k = raw.nodes[v].children.len();
        if k > 2 {
            if !options.binarize {
                return Err(Error::Multifurcation { children: k });
            }
            let kids = std::mem::take(&mut raw.nodes[v].children);
            let mut acc = kids[0];
            for &c in &kids[1..kids.len() - 1] {
                let joint = raw.add_node(None, Some(0.0));
                raw.nodes[joint].children = vec![acc, c];
                acc = joint;
            }
            raw.nodes[v].children = vec![acc, kids[kids.len() - 1]];
        }
    }
    if raw.nodes[top].children.len() == 2 {
        let edge = raw.nodes[top].length.unwrap_or(0.0);
        raw.nodes[top].length = Some(edge);
        let root = raw.add_node(None, None);
        raw.nodes[root].children.push(top);
        raw.root = root;
    } else {
        raw.nodes[top].length = None;
    }
    Ok(())
}

fn write_label(out: &mut String, label: &str) {
    let plain = !label.is_empty() && !label.bytes().any(is_delimiter);
    if plain {
        out.push_str(label);
    } else {
        out.push('\'');
        out.push_str(&label.replace('\'', "''"));
        out.push('\'');
    }
}

/// Serialize so that [`parse_newick`] recovers an identical tree: same child
/// order, same labels and bit-identical branch lengths.
pub fn write_newick(tree: &OrbTree) -> String {
    let mut out = String::with_capacity(tree.node_count() * 12);
    let root = tree.root();
    let top = match tree.children(root) {
        Children::Single(c) if !tree.is_leaf(c) => c,
        _ => root,
    };
    // Explicit stack: (node, next child slot).
    let mut stack: Vec<(NodeId, u8)> = vec![(top, 0)];
    while let Some((v, slot)) = stack.pop() {
        let kids: Vec<NodeId> = match tree.children(v) {
            Children::Leaf => Vec::new(),
            Children::Single(c) => vec![c],
            Children::Pair(a, b) => vec![a, b],
        };
        if kids.is_empty() {
            write_label(&mut out, tree.leaf_label(tree.leaf_index(v).unwrap()));
            out.push(':');
            out.push_str(&g17(tree.branch_length(v)));
            continue;
        }
        if (slot as usize) < kids.len() {
            out.push(if slot == 0 { '(' } else { ',' });
            stack.push((v, slot + 1));
            stack.push((kids[slot as usize], 0));
        } else {
            out.push(')');
            if v != root {
                out.push(':');
                out.push_str(&g17(tree.branch_length(v)));
            }
        }
    }
    out.push(';');
    out
}
