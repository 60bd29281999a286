use std::io;

use thiserror::Error;

use crate::fem::Spectrum;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} exceeds budget ({requested} > {limit})")]
    BudgetExceeded {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite (pivot {pivot} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    /// The eigensolver hit its restart cap. The pairs that did converge are
    /// kept in `partial`, which has `converged == false`.
    #[error("eigensolver did not converge: {converged} of {requested} pairs after {restarts} restarts")]
    NotConverged {
        requested: usize,
        converged: usize,
        restarts: usize,
        partial: Box<Spectrum>,
    },

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::Degenerate(_) => 2,
            Error::NotPositiveDefinite { .. } | Error::NotConverged { .. } | Error::Internal(_) => {
                3
            }
            Error::BudgetExceeded { .. } => 4,
            Error::Io(_) => 1,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
