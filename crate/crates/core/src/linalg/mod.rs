//! Symmetric band storage and kernels: band-masked Gram matrices, products,
//! traces of powers, band eigenvalues and stochastic trace estimation.

mod band;
mod eigen;
mod hutchinson;

pub use band::{banded_gram, BandedSymmetricMatrix, DataMatrix};
pub use eigen::{eigenvalues, tridiagonal_eigenvalues, tridiagonalize, MAX_QL_ITERATIONS};
pub use hutchinson::{hutchinson_trace, TraceEstimate};

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("empty data matrix")]
    Empty,
    #[error("power must be at least 1")]
    ZeroPower,
    #[error("need at least 2 probes, got {0}")]
    TooFewProbes(usize),
    #[error("QL iteration did not converge for eigenvalue {index} within {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },
    #[error("malformed band dump: {0}")]
    BadDump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
