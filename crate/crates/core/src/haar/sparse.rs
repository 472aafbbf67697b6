use nalgebra::DMatrix;

use crate::exec;
use crate::ultrametric::DENSE_LIMIT;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Symmetric matrix stored as its upper triangle (`row <= col`) in
/// coordinate format, sorted by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    triplets: Vec<Triplet>,
}

impl SparseSymMatrix {
    /// Build from arbitrary triplets. Entries below the diagonal are mirrored
    /// into the upper triangle; duplicate coordinates are an error.
    pub fn new(dim: usize, mut triplets: Vec<Triplet>) -> Result<Self> {
        for t in &mut triplets {
            if t.row >= dim || t.col >= dim {
                return Err(Error::arg(format!(
                    "entry ({}, {}) outside a {dim}x{dim} matrix",
                    t.row, t.col
                )));
            }
            if !t.value.is_finite() {
                return Err(Error::arg(format!("non-finite entry at ({}, {})", t.row, t.col)));
            }
            if t.row > t.col {
                std::mem::swap(&mut t.row, &mut t.col);
            }
        }
        triplets.sort_by_key(|t| (t.row, t.col));
        if let Some(w) = triplets.windows(2).find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col)) {
            return Err(Error::arg(format!("duplicate entry at ({}, {})", w[0].row, w[0].col)));
        }
        Ok(SparseSymMatrix { dim, triplets })
    }

    /// Triplets already in canonical order.
    pub(crate) fn from_sorted(dim: usize, triplets: Vec<Triplet>) -> Self {
        debug_assert!(triplets.windows(2).all(|w| (w[0].row, w[0].col) < (w[1].row, w[1].col)));
        debug_assert!(triplets.iter().all(|t| t.row <= t.col && t.col < dim));
        SparseSymMatrix { dim, triplets }
    }

    pub fn from_dense(m: &DMatrix<f64>, drop_tol: f64) -> Self {
        let n = m.nrows();
        let mut triplets = Vec::new();
        for row in 0..n {
            for col in row..n {
                let value = m[(row, col)];
                if value.abs() > drop_tol {
                    triplets.push(Triplet { row, col, value });
                }
            }
        }
        SparseSymMatrix { dim: n, triplets }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    /// Number of stored upper-triangle entries.
    pub fn stored(&self) -> usize {
        self.triplets.len()
    }

    /// Number of nonzero positions in the full symmetric matrix.
    pub fn nnz_symmetric(&self) -> usize {
        self.triplets.iter().map(|t| if t.row == t.col { 1 } else { 2 }).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        match self.triplets.binary_search_by_key(&key, |t| (t.row, t.col)) {
            Ok(k) => self.triplets[k].value,
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for t in self.triplets.iter().filter(|t| t.row == t.col) {
            d[t.row] = t.value;
        }
        d
    }

    pub fn trace(&self) -> f64 {
        self.triplets.iter().filter(|t| t.row == t.col).map(|t| t.value).sum()
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.dim > DENSE_LIMIT {
            return Err(Error::TooLarge {
                dim: self.dim,
                limit: DENSE_LIMIT,
            });
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for t in &self.triplets {
            m[(t.row, t.col)] = t.value;
            m[(t.col, t.row)] = t.value;
        }
        Ok(m)
    }

    /// `y = M x`, sequential, accumulated in triplet order.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.dim];
        for t in &self.triplets {
            y[t.row] += t.value * x[t.col];
            if t.row != t.col {
                y[t.col] += t.value * x[t.row];
            }
        }
        Ok(y)
    }

    /// `x' M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self
            .triplets
            .iter()
            .map(|t| {
                let p = t.value * x[t.row] * x[t.col];
                if t.row == t.col {
                    p
                } else {
                    2.0 * p
                }
            })
            .sum())
    }

    /// Both triangles in compressed-row form.
    pub fn to_csr(&self) -> Csr {
        let n = self.dim;
        let mut counts = vec![0usize; n + 1];
        for t in &self.triplets {
            counts[t.row + 1] += 1;
            if t.row != t.col {
                counts[t.col + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let nnz = indptr[n];
        let mut indices = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        // Lower-triangle entries of row r come from triplets with col == r
        // and precede the upper ones, so each row ends up sorted.
        let mut lower: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for t in &self.triplets {
            if t.row != t.col {
                lower[t.col].push((t.row, t.value));
            }
        }
        for (r, entries) in lower.iter().enumerate() {
            for &(c, v) in entries {
                indices[next[r]] = c;
                values[next[r]] = v;
                next[r] += 1;
            }
        }
        for t in &self.triplets {
            indices[next[t.row]] = t.col;
            values[next[t.row]] = t.value;
            next[t.row] += 1;
        }
        Csr {
            dim: n,
            indptr,
            indices,
            values,
        }
    }
}

/// Compressed sparse rows holding the full symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// `y = M x`, rows in parallel; each row is summed in column order.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        exec::fill_indexed(y, |r| {
            let (a, b) = (self.indptr[r], self.indptr[r + 1]);
            self.indices[a..b]
                .iter()
                .zip(&self.values[a..b])
                .map(|(&c, &v)| v * x[c])
                .sum()
        });
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.values[self.indptr[r]..self.indptr[r + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Default magnitude below which an entry counts as vanished:
/// `1e-12 * trace / dim`.
pub fn zero_threshold(m: &SparseSymMatrix) -> f64 {
    if m.dim() == 0 {
        0.0
    } else {
        1e-12 * m.trace().abs() / m.dim() as f64
    }
}

/// Fraction of entries of the full symmetric matrix that vanish, treating
/// magnitudes at most [`zero_threshold`] as zero.
pub fn observed_sparsity(m: &SparseSymMatrix) -> f64 {
    observed_sparsity_with(m, zero_threshold(m))
}

pub fn observed_sparsity_with(m: &SparseSymMatrix, threshold: f64) -> f64 {
    if m.dim() == 0 {
        return 1.0;
    }
    let nnz: usize = m
        .triplets()
        .iter()
        .filter(|t| t.value.abs() > threshold)
        .map(|t| if t.row == t.col { 1 } else { 2 })
        .sum();
    let total = (m.dim() as f64) * (m.dim() as f64);
    (total - nnz as f64) / total
}
