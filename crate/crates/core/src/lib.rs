//! Haar-like wavelets on out-rooted bifurcating trees.
//!
//! A strictly ultrametric matrix is the covariance matrix of a weighted rooted
//! binary tree whose root has a single child (an ORB-tree). This crate works
//! from the tree side: it builds the Haar-like basis of the tree, computes the
//! similar matrix `Φ'SΦ` directly from branch lengths without forming `S`,
//! estimates and (for trace-balanced trees) reproduces the spectrum of `S`, and
//! evaluates phylogenetic beta-diversity metrics including the Haar-like
//! distance.
//!
//! Modules:
//! - [`tree`]: ORB-tree storage, Newick I/O, builders, random generation, statistics.
//! - [`ultrametric`]: dense covariance matrices and the matrix/tree bijection.
//! - [`haar`]: the wavelet basis, trace branch lengths and sparsification.
//! - [`spectrum`]: trace balance, exact spectra, eigenvalue estimates, Lanczos.
//! - [`diversity`]: abundance tables, DPCoA, UniFrac, Haar-like distance, MDS.
//! - [`io`]: Matrix Market and TSV readers/writers.

pub mod diversity;
mod error;
pub mod exec;
pub mod fmt;
pub mod haar;
pub mod io;
pub mod spectrum;
pub mod tree;
pub mod ultrametric;

pub use error::{Error, ErrorKind, Result};
pub use tree::{NodeId, OrbTree};
