use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model, experiment or CLI configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain of the operation (κ ≤ 0, t ∉ [0, n], ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Overflow, non-finite values or other numerical breakdown.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The fixed-point precision budget of a torus orbit ran out.
    #[error("precision budget exhausted after {steps} steps ({budget} bits)")]
    PrecisionExhausted { steps: u64, budget: u32 },

    /// Root bracketing or isolation failed.
    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// The relative phase was not strictly increasing on the interpolation grid.
    #[error("relative phase is not monotone: {0}")]
    NonMonotone(String),

    /// A failure inside one Monte Carlo realization.
    #[error("realization {realization}: {source}")]
    Realization {
        realization: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Wraps an error with the id of the realization it came from.
    pub fn in_realization(self, realization: u64) -> Self {
        match self {
            e @ Error::Realization { .. } => e,
            e => Error::Realization {
                realization,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with realization wrappers removed.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Realization { source, .. } => source.root_cause(),
            e => e,
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self.root_cause(),
            Error::Numeric(_)
                | Error::PrecisionExhausted { .. }
                | Error::RootFinding(_)
                | Error::NonMonotone(_)
        )
    }
}
