use std::fmt;

use crate::tree::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("newick syntax error at byte {position}: {message}")]
    Newick { position: usize, message: String },

    #[error("invalid ORB-tree: {0}")]
    InvalidTree(ValidationReport),

    #[error("multifurcating node with {children} children (enable binarization to resolve)")]
    Multifurcation { children: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not strictly ultrametric: {0}")]
    NotUltrametric(String),

    #[error("dimension {dim} exceeds the dense limit of {limit}; use the sparse pipeline")]
    TooLarge { dim: usize, limit: usize },

    #[error("matrix is numerically singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("tree is not trace-balanced at internal node {rank} (gap {gap:.3e}, spread {spread:.3e})")]
    NotTraceBalanced { rank: usize, gap: f64, spread: f64 },

    #[error("eigensolver did not converge after {iterations} matrix-vector products ({converged} of {requested} converged)")]
    NotConverged {
        iterations: usize,
        converged: usize,
        requested: usize,
        partial: Vec<f64>,
    },

    #[error("abundance table: {0}")]
    Abundance(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("{format} parse error at line {line}: {message}")]
    Format {
        format: &'static str,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    Io,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Input => "input",
            ErrorKind::Numerical => "numerical",
            ErrorKind::Io => "io",
        })
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NotConverged { .. } | Error::Singular { .. } => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

