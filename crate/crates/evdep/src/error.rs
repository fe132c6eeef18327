//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by data ingestion, estimators and tests.
#[derive(Debug, Error)]
pub enum Error {
    /// A raw observation was NaN or infinite. Ranks computed from such a
    /// value would be meaningless, so ingestion refuses the matrix.
    #[error("non-finite value at row {row}, column {col} ({label})")]
    NonFinite {
        row: usize,
        col: usize,
        label: String,
    },

    #[error("expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("need at least {required} observations, got {got}")]
    TooFewRows { required: usize, got: usize },

    #[error("block length {block_length} exceeds the number of rows {rows}")]
    BlockTooLong { block_length: usize, rows: usize },

    #[error("group labels empty or misaligned: {0}")]
    BadGroupLabels(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the operation's domain: {0}")]
    InvalidDomain(String),

    /// The resampling null distribution collapsed to a point, so no
    /// p-value can be calibrated from it.
    #[error("degenerate replicate distribution: {0}")]
    DegenerateReplicates(String),

    /// The jackknife variance of a statistic is zero (e.g. perfectly
    /// monotone data), so the normal approximation is unusable.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("unknown test identifier `{0}` (expected one of s2n, s3n, maxstab, pickands_a, aplot_resid)")]
    UnknownTest(String),

    #[error("constrained least-squares solve failed: {0}")]
    SolveFailed(String),

    #[error("csv ingestion failed: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
