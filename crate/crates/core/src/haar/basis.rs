use std::ops::Range;

use nalgebra::DMatrix;

use super::split_weights;
use crate::exec;
use crate::tree::{Children, OrbTree};
use crate::ultrametric::DENSE_LIMIT;
use crate::{Error, Result};

/// A wavelet stored as two constant pieces: `pos` on `support.start..split`
/// and `neg` on `split..support.end`. The root wavelet has
/// `split == support.end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavelet {
    pub support: Range<usize>,
    pub split: usize,
    pub pos: f64,
    pub neg: f64,
}

impl Wavelet {
    pub fn value(&self, leaf: usize) -> f64 {
        if leaf < self.support.start || leaf >= self.support.end {
            0.0
        } else if leaf < self.split {
            self.pos
        } else {
            self.neg
        }
    }

    /// `<phi, x>` over the support.
    pub fn dot(&self, x: &[f64]) -> f64 {
        let left: f64 = x[self.support.start..self.split].iter().sum();
        let right: f64 = x[self.split..self.support.end].iter().sum();
        self.pos * left + self.neg * right
    }
}

/// Orthonormal Haar-like basis of `R^n` indexed by internal-node rank.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarBasis {
    wavelets: Vec<Wavelet>,
}

pub fn haar_basis(tree: &OrbTree) -> HaarBasis {
    let n = tree.n_leaves();
    let wavelets = tree
        .internal_nodes()
        .map(|v| match tree.children(v) {
            Children::Pair(a, b) => {
                let (pos, neg) = split_weights(tree.leaf_count(a), tree.leaf_count(b));
                Wavelet {
                    support: tree.leaf_range(v),
                    split: tree.leaf_range(b).start,
                    pos,
                    neg,
                }
            }
            _ => Wavelet {
                support: 0..n,
                split: n,
                pos: 1.0 / (n as f64).sqrt(),
                neg: 0.0,
            },
        })
        .collect();
    HaarBasis { wavelets }
}

impl HaarBasis {
    pub fn dim(&self) -> usize {
        self.wavelets.len()
    }

    pub fn wavelet(&self, rank: usize) -> &Wavelet {
        &self.wavelets[rank]
    }

    pub fn wavelets(&self) -> &[Wavelet] {
        &self.wavelets
    }

    /// `phi_v` as a dense vector over the leaves.
    pub fn dense(&self, rank: usize) -> Vec<f64> {
        let w = &self.wavelets[rank];
        let mut out = vec![0.0; self.dim()];
        out[w.support.start..w.split].fill(w.pos);
        out[w.split..w.support.end].fill(w.neg);
        out
    }

    /// The full matrix `Phi` (rows are leaves, columns internal ranks).
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge {
                dim: n,
                limit: DENSE_LIMIT,
            });
        }
        let mut data = vec![0.0; n * n];
        exec::for_each_chunk(&mut data, n.max(1), |r, col| {
            let w = &self.wavelets[r];
            col[w.support.start..w.split].fill(w.pos);
            col[w.split..w.support.end].fill(w.neg);
        });
        Ok(DMatrix::from_vec(n, n, data))
    }

    /// Wavelet coefficients `Phi' x`.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        Ok(exec::map_slice(&self.wavelets, |w| w.dot(x)))
    }

    /// `Phi c`, the inverse of [`HaarBasis::transform`].
    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let mut x = vec![0.0; self.dim()];
        for (w, &c) in self.wavelets.iter().zip(coeffs) {
            for xi in &mut x[w.support.start..w.split] {
                *xi += w.pos * c;
            }
            for xi in &mut x[w.split..w.support.end] {
                *xi += w.neg * c;
            }
        }
        Ok(x)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.dim(),
                found: len,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{parse_newick, NewickOptions};

    #[test]
    fn three_leaf_wavelet_values() {
        let t = parse_newick("((1:3,2:1):0,3:2):2;", &NewickOptions::default()).unwrap();
        let b = haar_basis(&t);
        let s = |x: f64| x.sqrt();
        let expect = [
            [1.0 / s(2.0), -1.0 / s(2.0), 0.0],
            [1.0 / s(6.0), 1.0 / s(6.0), -2.0 / s(6.0)],
            [1.0 / s(3.0), 1.0 / s(3.0), 1.0 / s(3.0)],
        ];
        for (r, row) in expect.iter().enumerate() {
            for (i, &e) in row.iter().enumerate() {
                assert!((b.dense(r)[i] - e).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn cherry() {
        let t = parse_newick("(a:1,b:1);", &NewickOptions::default()).unwrap();
        let b = haar_basis(&t);
        let h = 1.0 / 2f64.sqrt();
        for (got, want) in [(b.dense(1), [h, h]), (b.dense(0), [h, -h])] {
            assert!(got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-15));
        }
    }

    #[test]
    fn transform_round_trip() {
        let t = parse_newick("(((a:1,b:2):1,c:1):1,(d:1,e:3):2);", &NewickOptions::default()).unwrap();
        let b = haar_basis(&t);
        let x = [0.5, -1.0, 2.0, 3.0, 0.25];
        let c = b.transform(&x).unwrap();
        let back = b.inverse(&c).unwrap();
        for (u, v) in x.iter().zip(&back) {
            assert!((u - v).abs() < 1e-14);
        }
        let phi = b.to_dense().unwrap();
        let gram = phi.transpose() * &phi;
        assert!((gram - DMatrix::identity(5, 5)).amax() < 1e-15);
        assert!(b.transform(&[1.0]).is_err());
    }
}
