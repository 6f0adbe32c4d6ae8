//! Crate-wide error type.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A call violated an argument precondition.
    InvalidArgument(String),
    /// A sample lies outside the support of the requested distribution.
    Domain(String),
    /// The input carries no usable information for this operation
    /// (all samples equal, zero-width support, all-zero stream).
    DegenerateInput(String),
    /// Too few samples for the requested statistic.
    InsufficientData { needed: usize, got: usize },
    /// The least-squares system is rank deficient; no silent regularization
    /// is applied.
    SingularSystem,
    /// An iterative solve did not converge; `trace` holds the iterates.
    NumericalFailure { context: String, trace: Vec<f64> },
    /// A capture pipeline accepted zero bursts.
    EmptyDataset,
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed} samples, got {got}")
            }
            Error::SingularSystem => write!(f, "singular system: matrix is rank deficient"),
            Error::NumericalFailure { context, trace } => {
                write!(f, "numerical failure in {context} after {} iterations", trace.len())
            }
            Error::EmptyDataset => write!(f, "empty dataset: no bursts accepted"),
        }
    }
}
