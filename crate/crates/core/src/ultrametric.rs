//! Dense strictly ultrametric matrices and their correspondence with
//! ORB-trees.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::exec;
use crate::tree::{Children, OrbTree, RawTree};
use crate::{Error, Result};

/// Largest dimension for which dense `n × n` matrices are materialized.
pub const DENSE_LIMIT: usize = 20_000;

/// Largest dimension accepted by [`inverse_sign_check`].
pub const INVERSE_LIMIT: usize = 512;

/// Default relative threshold used when splitting a matrix into blocks.
pub const DEFAULT_SPLIT_TOL: f64 = 1e-9;

/// A symmetric nonnegative matrix whose diagonal strictly dominates each row
/// and whose entries satisfy `S(i,j) >= min(S(i,k), S(k,j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictUltrametricMatrix {
    labels: Vec<String>,
    entries: DMatrix<f64>,
}

impl StrictUltrametricMatrix {
    /// Wrap `entries` after checking the defining inequalities with additive
    /// tolerance `tol`.
    pub fn new(labels: Vec<String>, entries: DMatrix<f64>, tol: f64) -> Result<Self> {
        if labels.len() != entries.nrows() {
            return Err(Error::Dimension {
                expected: entries.nrows(),
                found: labels.len(),
            });
        }
        let report = is_strictly_ultrametric(&entries, tol);
        if !report.is_ok() {
            return Err(Error::NotUltrametric(report.to_string()));
        }
        Ok(StrictUltrametricMatrix { labels, entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

/// Covariance matrix of a tree: `S(i,j)` is the length of the path from the
/// root to the least common ancestor of leaves `i` and `j`.
pub fn covariance_from_tree(tree: &OrbTree) -> Result<StrictUltrametricMatrix> {
    let n = tree.n_leaves();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: DENSE_LIMIT,
        });
    }
    let prefix = tree.root_distances();
    let mut data = vec![0.0; n * n];
    // Column j is filled by walking from leaf j to the root; each ancestor
    // contributes its prefix over the leaves of the sibling subtree.
    exec::for_each_chunk(&mut data, n, |j, col| {
        let mut cur = tree.leaf_node(j);
        col[j] = prefix[cur.0];
        while let Some(p) = tree.parent(cur) {
            if let Children::Pair(a, b) = tree.children(p) {
                let sibling = if a == cur { b } else { a };
                col[tree.leaf_range(sibling)].fill(prefix[p.0]);
            }
            cur = p;
        }
    });
    Ok(StrictUltrametricMatrix {
        labels: tree.leaf_labels().to_vec(),
        entries: DMatrix::from_vec(n, n, data),
    })
}

/// Outcome of [`is_strictly_ultrametric`]. Each field holds the first
/// violation of its kind, in lexicographic index order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub dim: usize,
    /// Set when the input is not square; no other check runs then.
    pub not_square: Option<(usize, usize)>,
    pub asymmetric: Option<(usize, usize)>,
    pub negative: Option<(usize, usize)>,
    /// Row whose diagonal entry does not strictly exceed the rest of the row.
    pub diagonal: Option<usize>,
    /// `(i, j, k)` with `S(i,j) < min(S(i,k), S(k,j)) - tol`.
    pub triple: Option<(usize, usize, usize)>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.not_square.is_none()
            && self.asymmetric.is_none()
            && self.negative.is_none()
            && self.diagonal.is_none()
            && self.triple.is_none()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "strictly ultrametric ({}x{})", self.dim, self.dim);
        }
        let mut parts = Vec::new();
        if let Some((r, c)) = self.not_square {
            parts.push(format!("matrix is {r}x{c}, not square"));
        }
        if let Some((i, j)) = self.asymmetric {
            parts.push(format!("asymmetric at ({i},{j})"));
        }
        if let Some((i, j)) = self.negative {
            parts.push(format!("negative entry at ({i},{j})"));
        }
        if let Some(i) = self.diagonal {
            parts.push(format!("diagonal not strictly maximal in row {i}"));
        }
        if let Some((i, j, k)) = self.triple {
            parts.push(format!("S({i},{j}) < min(S({i},{k}), S({k},{j}))"));
        }
        f.write_str(&parts.join("; "))
    }
}

/// Check every defining inequality of a strictly ultrametric matrix.
///
/// Symmetry, nonnegativity and the triple condition use the additive
/// tolerance `tol`; diagonal dominance is strict.
pub fn is_strictly_ultrametric(m: &DMatrix<f64>, tol: f64) -> CheckReport {
    let (r, c) = m.shape();
    let mut report = CheckReport {
        dim: r,
        ..Default::default()
    };
    if r != c {
        report.not_square = Some((r, c));
        return report;
    }
    let n = r;
    'sym: for i in 0..n {
        for j in 0..n {
            let x = m[(i, j)];
            if !x.is_finite() || x < -tol {
                report.negative.get_or_insert((i, j));
            }
            if j > i && !((x - m[(j, i)]).abs() <= tol) {
                report.asymmetric = Some((i, j));
                break 'sym;
            }
        }
    }
    for i in 0..n {
        let d = m[(i, i)];
        let dominated = if n == 1 {
            !(d > 0.0)
        } else {
            (0..n).any(|t| t != i && !(d > m[(i, t)]))
        };
        if dominated {
            report.diagonal = Some(i);
            break;
        }
    }
    report.triple = exec::find_first(n, |i| {
        for j in 0..n {
            let sij = m[(i, j)] + tol;
            for k in 0..n {
                if sij < m[(i, k)].min(m[(k, j)]) {
                    return Some((i, j, k));
                }
            }
        }
        None
    });
    report
}

/// Recover the ORB-tree whose covariance is `m`.
///
/// Rows are split recursively into the connected components of
/// `S - min(S)` restricted to the current block, where entries at most
/// `rel_tol * max(S)` count as zero. More than two components are joined
/// left-deep with zero-length edges.
pub fn tree_from_matrix(m: &StrictUltrametricMatrix, rel_tol: f64) -> Result<OrbTree> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::arg("empty matrix"));
    }
    let s = m.entries();
    let thr = rel_tol * s.max().abs();
    let mut raw = RawTree::new();
    let root = raw.add_node(None, None);

    struct Task {
        rows: Vec<usize>,
        parent: usize,
        base: f64,
    }
    let mut stack = vec![Task {
        rows: (0..n).collect(),
        parent: root,
        base: 0.0,
    }];
    let mut label = vec![0usize; n];
    while let Some(task) = stack.pop() {
        if let [i] = task.rows[..] {
            raw.add_child(task.parent, Some(m.labels()[i].clone()), Some(s[(i, i)] - task.base));
            continue;
        }
        let rows = &task.rows;
        let mut low = f64::INFINITY;
        for (a, &i) in rows.iter().enumerate() {
            for &j in &rows[a + 1..] {
                low = low.min(s[(i, j)]);
            }
        }
        let node = raw.add_child(task.parent, None, Some(low - task.base));

        // Connected components of the thresholded block, seeded in row order.
        for &i in rows {
            label[i] = usize::MAX;
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for &seed in rows {
            if label[seed] != usize::MAX {
                continue;
            }
            let id = comps.len();
            label[seed] = id;
            let mut comp = vec![seed];
            let mut head = 0;
            while head < comp.len() {
                let i = comp[head];
                head += 1;
                for &j in rows {
                    if label[j] == usize::MAX && s[(i, j)] - low > thr {
                        label[j] = id;
                        comp.push(j);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        if comps.len() < 2 {
            return Err(Error::NotUltrametric(format!(
                "block of {} rows does not split at level {low}",
                rows.len()
            )));
        }

        let mut attach = node;
        while comps.len() > 2 {
            let last = comps.pop().unwrap();
            let inner = raw.add_child(attach, None, Some(0.0));
            stack.push(Task {
                rows: last,
                parent: attach,
                base: low,
            });
            attach = inner;
        }
        // The left task is popped, and so attached, before the right one.
        let right = comps.pop().unwrap();
        let left = comps.pop().unwrap();
        stack.push(Task {
            rows: right,
            parent: attach,
            base: low,
        });
        stack.push(Task {
            rows: left,
            parent: attach,
            base: low,
        });
    }
    OrbTree::from_raw(&raw)
}

/// Result of [`inverse_sign_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct InverseReport {
    pub inverse: DMatrix<f64>,
    /// Ratio of extreme eigenvalue magnitudes.
    pub condition: f64,
    /// First off-diagonal entry of the inverse that is positive beyond tolerance.
    pub positive_off_diagonal: Option<(usize, usize)>,
    /// First row of the inverse that is not strictly diagonally dominant.
    pub not_dominant: Option<usize>,
    /// First `(i, j)` where `S(i,j)` is zero but `S⁻¹(i,j)` is not.
    pub pattern_mismatch: Option<(usize, usize)>,
}

impl InverseReport {
    pub fn is_ok(&self) -> bool {
        self.positive_off_diagonal.is_none()
            && self.not_dominant.is_none()
            && self.pattern_mismatch.is_none()
    }
}

impl fmt::Display for InverseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(
                f,
                "inverse is a strictly diagonally dominant M-matrix (condition {:.3e})",
                self.condition
            );
        }
        let mut parts = Vec::new();
        if let Some((i, j)) = self.positive_off_diagonal {
            parts.push(format!("positive off-diagonal inverse entry at ({i},{j})"));
        }
        if let Some(i) = self.not_dominant {
            parts.push(format!("inverse row {i} not strictly diagonally dominant"));
        }
        if let Some((i, j)) = self.pattern_mismatch {
            parts.push(format!("zero pattern differs at ({i},{j})"));
        }
        f.write_str(&parts.join("; "))
    }
}

/// Invert `m` densely and check the sign structure of the inverse.
///
/// Entries of `m` at most `tol * max|m|` count as zero. Every test on the
/// inverse is made up to its rounding-error level
/// `n * eps * condition * max|m⁻¹|`: off-diagonal entries must not exceed it,
/// must vanish to within it where `m` is zero, and each row's dominance
/// margin `inv_ii - sum_j |inv_ij|` must not fall below minus it. Genuine
/// inverse entries and row sums of deep trees can sit far below that level,
/// where their signs cannot be certified.
pub fn inverse_sign_check(m: &DMatrix<f64>, tol: f64) -> Result<InverseReport> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: m.ncols(),
        });
    }
    if n > INVERSE_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: INVERSE_LIMIT,
        });
    }
    if n == 0 {
        return Err(Error::arg("empty matrix"));
    }
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let hi = eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let lo = eig.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    let condition = hi / lo;
    if !(condition < 1e14) {
        return Err(Error::Singular { condition });
    }
    let inverse = m.clone().try_inverse().ok_or(Error::Singular { condition })?;

    let s_zero = tol * m.amax();
    let inv_zero = n as f64 * f64::EPSILON * condition * inverse.amax();
    let mut report = InverseReport {
        inverse,
        condition,
        positive_off_diagonal: None,
        not_dominant: None,
        pattern_mismatch: None,
    };
    let inv = &report.inverse;
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let x = inv[(i, j)];
            off += x.abs();
            if x > inv_zero && report.positive_off_diagonal.is_none() {
                report.positive_off_diagonal = Some((i, j));
            }
            if m[(i, j)].abs() <= s_zero && x.abs() > inv_zero && report.pattern_mismatch.is_none() {
                report.pattern_mismatch = Some((i, j));
            }
        }
        if !(inv[(i, i)] - off >= -inv_zero) && report.not_dominant.is_none() {
            report.not_dominant = Some(i);
        }
    }
    Ok(report)
}
