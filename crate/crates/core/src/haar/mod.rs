//! Haar-like wavelets on ORB-trees and the tree-direct sparsification of
//! covariance matrices.
//!
//! Internal nodes are indexed by their postorder rank (`0..n`, root last);
//! every per-node vector in this module uses that indexing.

mod basis;
mod sparse;
mod sparsify;
mod trace;

pub use basis::{haar_basis, HaarBasis, Wavelet};
pub use sparse::{observed_sparsity, observed_sparsity_with, zero_threshold, Csr, SparseSymMatrix, Triplet};
pub use sparsify::{dense_conjugate, sparsify, Method, ReferenceMode, Sparsified, SparsifyOptions};
pub use trace::{Aggregate, TraceLengths};

/// Values of a non-root wavelet on its two halves: `+sqrt(n1/(n0 n))` on
/// the first child's leaves and `-sqrt(n0/(n1 n))` on the second's.
pub(crate) fn split_weights(n0: usize, n1: usize) -> (f64, f64) {
    let (a, b) = (n0 as f64, n1 as f64);
    let n = a + b;
    ((b / (a * n)).sqrt(), -(a / (b * n)).sqrt())
}
