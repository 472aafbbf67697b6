//! Thick-restart Lanczos with full reorthogonalization for the largest
//! eigenvalues of a sparse symmetric matrix.
//!
//! The basis `V` and its image `W = A V` are kept explicitly. Each cycle
//! extends `V` by Krylov steps up to `basis_size` vectors, solves the
//! projected problem `V' A V`, and restarts from the leading Ritz vectors
//! plus the pending residual direction, which preserves the Krylov
//! structure.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::haar::{Csr, SparseSymMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Relative residual target: `||A x - mu x|| <= tol * ||A||`.
    pub tol: f64,
    /// Budget of matrix-vector products.
    pub max_matvecs: usize,
    /// Krylov basis size per cycle; 0 picks `max(2k + 20, 40)`.
    pub basis_size: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-12,
            max_matvecs: 20_000,
            basis_size: 0,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanczosResult {
    /// Largest eigenvalues, decreasing.
    pub values: Vec<f64>,
    /// Residual norms of the matching Ritz pairs.
    pub residuals: Vec<f64>,
    pub matvecs: usize,
    /// Estimate of `||A||_2` used to scale the tolerance.
    pub norm_estimate: f64,
}

/// The `k` largest eigenvalues of `m`.
pub fn top_k_eigenvalues(m: &SparseSymMatrix, k: usize, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let opts = LanczosOptions {
        tol,
        max_matvecs: max_iter,
        ..Default::default()
    };
    lanczos(m, k, &opts).map(|r| r.values)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Remove the components of `r` along the orthonormal `basis`, twice.
fn orthogonalize(r: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, r);
            for (x, y) in r.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

/// `sum_j coeffs[j] * vecs[j]`.
fn combine(vecs: &[Vec<f64>], coeffs: impl Iterator<Item = f64>, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (v, c) in vecs.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

pub fn lanczos(m: &SparseSymMatrix, k: usize, opts: &LanczosOptions) -> Result<LanczosResult> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(Error::arg(format!("requested {k} eigenvalues of a {n}x{n} matrix")));
    }
    let csr: Csr = m.to_csr();
    let basis_size = match opts.basis_size {
        0 => (2 * k + 20).max(40),
        b => b.max(k + 1),
    }
    .min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_vec = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random::<f64>() - 0.5).collect() };

    let mut v: Vec<Vec<f64>> = Vec::with_capacity(basis_size);
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(basis_size);
    let mut pending = random_vec(n);
    let mut matvecs = 0usize;
    let mut norm_est = csr.inf_norm().max(f64::MIN_POSITIVE);
    let mut spectral_seen = 0.0f64;

    loop {
        // Extend the basis with Krylov directions.
        while v.len() < basis_size {
            orthogonalize(&mut pending, &v);
            let mut beta = norm(&pending);
            if beta <= 1e-10 * norm_est.max(spectral_seen) * (n as f64).sqrt() || !beta.is_finite() {
                // Invariant subspace reached: continue from a fresh direction.
                pending = random_vec(n);
                orthogonalize(&mut pending, &v);
                beta = norm(&pending);
                if beta <= 1e-300 {
                    break;
                }
            }
            pending.iter_mut().for_each(|x| *x /= beta);
            let mut image = vec![0.0; n];
            csr.matvec_into(&pending, &mut image);
            matvecs += 1;
            v.push(std::mem::take(&mut pending));
            pending = image.clone();
            w.push(image);
        }

        // Rayleigh-Ritz on the current basis.
        let p = v.len();
        let mut h = DMatrix::zeros(p, p);
        for j in 0..p {
            for i in 0..=j {
                let x = 0.5 * (dot(&v[i], &w[j]) + dot(&v[j], &w[i]));
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        spectral_seen = spectral_seen.max(eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs())));
        norm_est = spectral_seen.max(f64::MIN_POSITIVE);

        let keep = if p == n { k } else { (k + (p - k) / 2).min(p - 1).max(k) };
        let mut ritz_v = Vec::with_capacity(keep);
        let mut ritz_w = Vec::with_capacity(keep);
        let mut values = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        for (slot, &j) in order.iter().take(keep).enumerate() {
            let y = eig.eigenvectors.column(j);
            let x = combine(&v, y.iter().copied(), n);
            let ax = combine(&w, y.iter().copied(), n);
            if slot < k {
                let theta = eig.eigenvalues[j];
                let res: f64 = ax.iter().zip(&x).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
                values.push(theta);
                residuals.push(res);
            }
            ritz_v.push(x);
            ritz_w.push(ax);
        }

        let target = opts.tol * norm_est;
        let converged = residuals.iter().take_while(|&&r| r <= target).count();
        if converged == k || p == n {
            return Ok(LanczosResult {
                values,
                residuals,
                matvecs,
                norm_estimate: norm_est,
            });
        }
        if matvecs >= opts.max_matvecs {
            return Err(Error::NotConverged {
                iterations: matvecs,
                converged,
                requested: k,
                partial: values,
            });
        }
        // The continuation direction must be orthogonal to the whole old
        // basis, not just to the Ritz vectors that survive the restart.
        orthogonalize(&mut pending, &v);
        v = ritz_v;
        w = ritz_w;
    }
}
