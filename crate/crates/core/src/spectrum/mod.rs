//! Spectra of tree covariance matrices: trace-balance, exact spectra of
//! balanced trees, per-node eigenvalue estimates and a Lanczos eigensolver
//! for the sparsified operator.

mod balance;
mod exact;
mod lanczos;

pub use balance::{balance_report, eigen_estimates, BalanceReport, EigenEstimate, NodeBalance, DEFAULT_BALANCE_TOL};
pub use exact::{exact_spectrum, lengths_from_spectrum, SpectrumEntry};
pub use lanczos::{lanczos, top_k_eigenvalues, LanczosOptions, LanczosResult};
