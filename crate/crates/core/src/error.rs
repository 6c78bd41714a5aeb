//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by validation and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("times and prices have different lengths ({times} vs {prices})")]
    LengthMismatch { times: usize, prices: usize },

    #[error("need at least {min} observations, got {n}")]
    TooFewObservations { n: usize, min: usize },

    #[error("times are not strictly increasing at index {index}")]
    NonMonotoneTimes { index: usize },

    #[error("price at index {index} is not strictly positive")]
    NonPositivePrice { index: usize },

    #[error("time at index {index} lies outside [0, 2\u{3c0}]")]
    TimeOutOfRange { index: usize },

    #[error("coefficient array too short: need k_max >= {required}, have {available}")]
    InsufficientCoeffs { required: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("grid is not regular (max relative mesh deviation {max_rel_dev:.3e})")]
    IrregularGrid { max_rel_dev: f64 },

    #[error("variance estimate is negative ({0:.6e})")]
    NegativeVariance(f64),

    #[error("imaginary residue too large (relative size {rel:.3e})")]
    ImaginaryResidue { rel: f64 },

    #[error("sample too small: need at least {min}, got {n}")]
    UndersizedSample { n: usize, min: usize },

    #[error("non-positive value at {context}: log transform undefined")]
    NonPositiveValue { context: String },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
