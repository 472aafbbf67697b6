//! Phylogenetic beta-diversity between samples given as probability vectors
//! over the leaves of a tree.

mod abundance;
mod mds;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

pub use abundance::{load_abundance, parse_abundance, AbundanceTable, LoadOptions, Orientation, UnknownLabels};
pub use mds::{mds_embed, Embedding};

use crate::exec;
use crate::haar::{sparsify, split_weights, SparsifyOptions};
use crate::tree::{Children, OrbTree};
use crate::{Error, Result};

fn check_rows(tree: &OrbTree, a: &[f64], b: &[f64]) -> Result<()> {
    for x in [a, b] {
        if x.len() != tree.n_leaves() {
            return Err(Error::Dimension {
                expected: tree.n_leaves(),
                found: x.len(),
            });
        }
    }
    Ok(())
}

/// Mass `x(e)` below every edge, indexed by node id.
pub fn edge_masses(tree: &OrbTree, x: &[f64]) -> Vec<f64> {
    let mut mass = vec![0.0; tree.node_count()];
    for v in tree.nodes() {
        mass[v.0] = match tree.children(v) {
            Children::Leaf => x[tree.leaf_index(v).unwrap()],
            Children::Single(c) => mass[c.0],
            Children::Pair(l, r) => mass[l.0] + mass[r.0],
        };
    }
    mass
}

fn difference(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// DPCoA distance `sqrt(sum_e l(e) (a(e) - b(e))^2)`, which equals
/// `sqrt((a-b)' S (a-b))`.
pub fn dpcoa(a: &[f64], b: &[f64], tree: &OrbTree) -> Result<f64> {
    check_rows(tree, a, b)?;
    let d = edge_masses(tree, &difference(a, b));
    let lengths = tree.branch_lengths();
    Ok(d.iter().zip(lengths).map(|(m, l)| l * m * m).sum::<f64>().sqrt())
}

/// Weighted UniFrac `sum_e l(e) |a(e) - b(e)|`.
pub fn weighted_unifrac(a: &[f64], b: &[f64], tree: &OrbTree) -> Result<f64> {
    check_rows(tree, a, b)?;
    let d = edge_masses(tree, &difference(a, b));
    Ok(d.iter().zip(tree.branch_lengths()).map(|(m, l)| l * m.abs()).sum())
}

/// Number of leaves with positive mass below every edge.
fn presence(tree: &OrbTree, x: &[f64]) -> Vec<usize> {
    let mut count = vec![0usize; tree.node_count()];
    for v in tree.nodes() {
        count[v.0] = match tree.children(v) {
            Children::Leaf => usize::from(x[tree.leaf_index(v).unwrap()] > 0.0),
            Children::Single(c) => count[c.0],
            Children::Pair(l, r) => count[l.0] + count[r.0],
        };
    }
    count
}

/// Unweighted UniFrac: branch length leading to exactly one of the two
/// samples, as a fraction of the total branch length.
pub fn unweighted_unifrac(a: &[f64], b: &[f64], tree: &OrbTree) -> Result<f64> {
    check_rows(tree, a, b)?;
    let total = tree.total_length();
    if !(total > 0.0) {
        return Err(Error::arg("unweighted UniFrac needs a positive total branch length"));
    }
    let (pa, pb) = (presence(tree, a), presence(tree, b));
    let num: f64 = tree
        .branch_lengths()
        .iter()
        .zip(pa.iter().zip(&pb))
        .filter(|(_, (x, y))| (**x > 0) != (**y > 0))
        .map(|(l, _)| l)
        .sum();
    Ok(num / total)
}

/// Haar-like coefficients `Phi' x`, by internal rank, from subtree sums.
pub fn haar_coefficients(tree: &OrbTree, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != tree.n_leaves() {
        return Err(Error::Dimension {
            expected: tree.n_leaves(),
            found: x.len(),
        });
    }
    let mass = edge_masses(tree, x);
    Ok(tree
        .internal_nodes()
        .map(|v| match tree.children(v) {
            Children::Pair(l, r) => {
                let (pos, neg) = split_weights(tree.leaf_count(l), tree.leaf_count(r));
                pos * mass[l.0] + neg * mass[r.0]
            }
            _ => mass[v.0] / (tree.n_leaves() as f64).sqrt(),
        })
        .collect())
}

/// `lambda_v Delta_v^2` for every internal node, with `Delta = Phi'(a - b)`.
pub fn split_scores(a: &[f64], b: &[f64], tree: &OrbTree, lambda: &[f64]) -> Result<Vec<f64>> {
    check_rows(tree, a, b)?;
    if lambda.len() != tree.n_internal() {
        return Err(Error::Dimension {
            expected: tree.n_internal(),
            found: lambda.len(),
        });
    }
    let delta = haar_coefficients(tree, &difference(a, b))?;
    Ok(lambda.iter().zip(&delta).map(|(l, d)| l * d * d).collect())
}

/// Haar-like distance `sqrt(sum_v lambda_v Delta_v^2)`; `lambda` is the
/// diagonal produced by [`crate::haar::sparsify`].
pub fn haar_distance(a: &[f64], b: &[f64], tree: &OrbTree, lambda: &[f64]) -> Result<f64> {
    let scores = split_scores(a, b, tree, lambda)?;
    Ok(scores.iter().sum::<f64>().sqrt())
}

/// Contribution of every split to the squared Haar-like distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitImportance {
    /// By internal rank.
    pub scores: Vec<f64>,
    /// Internal ranks by decreasing score (ties by rank).
    pub ranking: Vec<usize>,
    /// `(score - mean) / sd` over the nonzero scores (0 when undefined).
    pub z: Vec<f64>,
    pub left_count: Vec<usize>,
    pub right_count: Vec<usize>,
    /// A few leaf labels from each side of the split.
    pub left_labels: Vec<Vec<String>>,
    pub right_labels: Vec<Vec<String>>,
}

impl SplitImportance {
    /// Equals the squared Haar-like distance bit for bit.
    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }
}

const LABEL_SAMPLE: usize = 3;

pub fn split_importance(a: &[f64], b: &[f64], tree: &OrbTree, lambda: &[f64]) -> Result<SplitImportance> {
    let scores = split_scores(a, b, tree, lambda)?;
    let mut ranking: Vec<usize> = (0..scores.len()).collect();
    ranking.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y)));

    let nonzero: Vec<f64> = scores.iter().copied().filter(|s| *s != 0.0).collect();
    let (mean, sd) = if nonzero.is_empty() {
        (0.0, 0.0)
    } else {
        let m = nonzero.iter().sum::<f64>() / nonzero.len() as f64;
        let var = nonzero.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / nonzero.len() as f64;
        (m, var.sqrt())
    };
    let z = scores.iter().map(|s| if sd > 0.0 { (s - mean) / sd } else { 0.0 }).collect();

    let labels = |range: std::ops::Range<usize>| -> Vec<String> {
        range.take(LABEL_SAMPLE).map(|i| tree.leaf_label(i).to_string()).collect()
    };
    let mut left_count = Vec::with_capacity(scores.len());
    let mut right_count = Vec::with_capacity(scores.len());
    let mut left_labels = Vec::with_capacity(scores.len());
    let mut right_labels = Vec::with_capacity(scores.len());
    for v in tree.internal_nodes() {
        match tree.children(v) {
            Children::Pair(l, r) => {
                left_count.push(tree.leaf_count(l));
                right_count.push(tree.leaf_count(r));
                left_labels.push(labels(tree.leaf_range(l)));
                right_labels.push(labels(tree.leaf_range(r)));
            }
            _ => {
                left_count.push(tree.leaf_count(v));
                right_count.push(0);
                left_labels.push(labels(tree.leaf_range(v)));
                right_labels.push(Vec::new());
            }
        }
    }
    Ok(SplitImportance {
        scores,
        ranking,
        z,
        left_count,
        right_count,
        left_labels,
        right_labels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Dpcoa,
    WeightedUnifrac,
    UnweightedUnifrac,
    Haar,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Dpcoa => "dpcoa",
            Metric::WeightedUnifrac => "wu",
            Metric::UnweightedUnifrac => "uu",
            Metric::Haar => "haar",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dpcoa" => Metric::Dpcoa,
            "wu" | "weighted-unifrac" => Metric::WeightedUnifrac,
            "uu" | "unweighted-unifrac" => Metric::UnweightedUnifrac,
            "haar" => Metric::Haar,
            _ => return Err(Error::arg(format!("unknown metric {s:?}"))),
        })
    }
}

/// Symmetric matrix of distances between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub sample_ids: Vec<String>,
    pub values: DMatrix<f64>,
    pub metric: String,
}

impl DistanceMatrix {
    /// Validate shape, symmetry, nonnegativity and the zero diagonal.
    pub fn new(sample_ids: Vec<String>, values: DMatrix<f64>, metric: impl Into<String>) -> Result<Self> {
        let n = sample_ids.len();
        if values.shape() != (n, n) {
            return Err(Error::Dimension {
                expected: n,
                found: values.nrows(),
            });
        }
        for i in 0..n {
            if values[(i, i)] != 0.0 {
                return Err(Error::arg(format!("distance matrix has nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let (x, y) = (values[(i, j)], values[(j, i)]);
                if !(x >= 0.0) || x != y {
                    return Err(Error::arg(format!("distance matrix entry ({i},{j}) is negative or asymmetric")));
                }
            }
        }
        Ok(DistanceMatrix {
            sample_ids,
            values,
            metric: metric.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_ids.is_empty()
    }
}

/// Distances between every pair of samples.
pub fn pairwise(table: &AbundanceTable, tree: &OrbTree, metric: Metric) -> Result<DistanceMatrix> {
    let n = table.n_samples();
    if n < 2 {
        return Err(Error::arg("pairwise distances need at least two samples"));
    }
    let lambda = match metric {
        Metric::Haar => sparsify(tree, &SparsifyOptions::default())?.lambda,
        _ => Vec::new(),
    };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let dist = exec::map_slice(&pairs, |&(i, j)| {
        let (a, b) = (table.row(i), table.row(j));
        match metric {
            Metric::Dpcoa => dpcoa(a, b, tree),
            Metric::WeightedUnifrac => weighted_unifrac(a, b, tree),
            Metric::UnweightedUnifrac => unweighted_unifrac(a, b, tree),
            Metric::Haar => haar_distance(a, b, tree, &lambda),
        }
    });
    let mut values = DMatrix::zeros(n, n);
    for (&(i, j), d) in pairs.iter().zip(dist) {
        let d = d?;
        values[(i, j)] = d;
        values[(j, i)] = d;
    }
    Ok(DistanceMatrix {
        sample_ids: table.sample_ids().to_vec(),
        values,
        metric: metric.name().to_string(),
    })
}
