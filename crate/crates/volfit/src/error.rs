//! Crate-wide error type and result alias.

use thiserror::Error;

/// Errors surfaced by pricing, calibration, simulation, and data-loading
/// routines.
#[derive(Debug, Error)]
pub enum VolfitError {
    /// An argument violated a documented precondition (non-positive strike,
    /// correlation outside (-1, 1), unsorted smile, malformed CSV header, ...).
    #[error("invalid input: {message}")]
    InvalidInput { message: String },

    /// A well-posed query has no answer in the searched domain, e.g. an
    /// option price outside its arbitrage bounds or an implied volatility
    /// beyond the solver bracket.
    #[error("no solution: {message}")]
    NoSolution { message: String },

    /// An iterative routine exhausted its budget without meeting its
    /// convergence criterion.
    #[error("did not converge: {message}")]
    NonConvergence { message: String },

    /// Filesystem failure while reading a quote file or corpus directory.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// CSV-level failure (I/O or framing) while reading a quote file.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl VolfitError {
    /// Shorthand for [`VolfitError::InvalidInput`].
    pub fn invalid(message: impl Into<String>) -> Self {
        VolfitError::InvalidInput {
            message: message.into(),
        }
    }

    pub(crate) fn no_solution(message: impl Into<String>) -> Self {
        VolfitError::NoSolution {
            message: message.into(),
        }
    }

    pub(crate) fn non_convergence(message: impl Into<String>) -> Self {
        VolfitError::NonConvergence {
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, VolfitError>;
