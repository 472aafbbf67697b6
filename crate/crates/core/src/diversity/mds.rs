use nalgebra::{DMatrix, SymmetricEigen};

use super::DistanceMatrix;
use crate::{Error, Result};

/// Classical multidimensional scaling of a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub sample_ids: Vec<String>,
    /// One row per sample, one column per requested axis.
    pub coords: DMatrix<f64>,
    /// Eigenvalues of the double-centered Gram matrix for each axis.
    pub eigenvalues: Vec<f64>,
    /// Number of axes with a positive eigenvalue; later axes are zero.
    pub positive_axes: usize,
    /// Share of the absolute spectrum carried by negative eigenvalues,
    /// which no Euclidean embedding can represent.
    pub distortion: f64,
}

/// Embed `d` in `dims` dimensions. The first nonzero coordinate of every
/// axis is made positive.
pub fn mds_embed(d: &DistanceMatrix, dims: usize) -> Result<Embedding> {
    let n = d.len();
    if dims == 0 {
        return Err(Error::arg("embedding needs at least one dimension"));
    }
    if n == 0 {
        return Err(Error::arg("empty distance matrix"));
    }
    // B = -1/2 J D^2 J with J the centering projector.
    let sq = d.values.map(|x| x * x);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + grand));
    let b = (&b + b.transpose()) * 0.5;

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let cutoff = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let positive_axes = eig.eigenvalues.iter().filter(|x| **x > cutoff).count();
    let negative: f64 = eig.eigenvalues.iter().filter(|x| **x < -cutoff).map(|x| -x).sum();
    let total: f64 = eig.eigenvalues.iter().map(|x| x.abs()).sum();
    let distortion = if negative > 0.0 { negative / total } else { 0.0 };

    let mut coords = DMatrix::zeros(n, dims);
    let mut eigenvalues = Vec::with_capacity(dims);
    for axis in 0..dims {
        let Some(&k) = order.get(axis) else {
            eigenvalues.push(0.0);
            continue;
        };
        let value = eig.eigenvalues[k];
        eigenvalues.push(value);
        if value <= cutoff {
            continue;
        }
        let mut col: Vec<f64> = eig.eigenvectors.column(k).iter().map(|x| x * value.sqrt()).collect();
        let tiny = 1e-12 * col.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if col.iter().find(|x| x.abs() > tiny).is_some_and(|x| *x < 0.0) {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        for (i, x) in col.into_iter().enumerate() {
            coords[(i, axis)] = x;
        }
    }
    Ok(Embedding {
        sample_ids: d.sample_ids.clone(),
        coords,
        eigenvalues,
        positive_axes,
        distortion,
    })
}
