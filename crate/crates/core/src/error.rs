use thiserror::Error;

/// Errors raised while building measures, evaluating strategies, or running checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weights must be non-negative and sum to 1 (got total {total})")]
    Normalization { total: f64 },

    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },

    #[error("quadrature did not converge (error estimate {estimate:e}, tolerance {tolerance:e})")]
    Integration { estimate: f64, tolerance: f64 },

    #[error("cannot condition on an event of probability {mass}")]
    Conditioning { mass: f64 },

    #[error("observation {0} lies in no partition cell")]
    PartitionCoverage(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("kernel base measure does not match strategy base measure")]
    KernelBase,

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("species sampling requires a non-atomic base measure")]
    NonAtomicity,

    #[error("density is not positive at observation {0}")]
    Support(String),

    #[error("predictive density mass drifted to {mass} (tolerance {tolerance:e})")]
    NumericalDrift { mass: f64, tolerance: f64 },

    #[error("parameter sequence exhausted at horizon {0}")]
    Horizon(usize),

    #[error("enumeration of {entries} entries exceeds budget {budget}")]
    EnumerationBudget { entries: u128, budget: u128 },

    #[error("sample of size {got} is below the required minimum {min}")]
    SampleSize { got: usize, min: usize },

    #[error("invalid observation: {0}")]
    Observation(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
