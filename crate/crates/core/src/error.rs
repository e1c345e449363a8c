use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The request exceeds a hard size limit; nothing was allocated.
    #[error("capacity exceeded for {what}: requested {requested}, limit {limit}")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    /// The decision-list learner found no grid gate meeting the coverage and fit conditions.
    #[error(
        "no consistent decision list: no gate covers at least {threshold} of the {remaining} remaining samples with an affine fit"
    )]
    NoConsistentList { remaining: usize, threshold: usize },

    /// Two samples share an input but their labels differ by more than the tolerance.
    #[error("inconsistent data: samples {first} and {second} share an input but labels differ by {gap}")]
    InconsistentData {
        first: usize,
        second: usize,
        gap: f64,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// `true` for errors caused by bad caller input, as opposed to runtime failures.
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Serialization(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
