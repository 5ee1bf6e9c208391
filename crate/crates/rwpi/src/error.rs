//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent: expected a value in [1, inf], got {got}")]
    InvalidExponent { got: f64 },
    #[error("invalid transport power: expected rho >= 1, got {got}")]
    InvalidPower { got: f64 },
    #[error("empty input: {what}")]
    EmptyInput { what: &'static str },
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("column {index} is degenerate (zero sample standard deviation)")]
    DegenerateColumn { index: usize },
    #[error("dataset kind mismatch: operation requires a {expected} dataset")]
    KindMismatch { expected: &'static str },
    #[error("non-finite value encountered in {what}")]
    NonFinite { what: &'static str },
    #[error("invalid confidence level: {what}")]
    InvalidLevel { what: String },
    #[error("invalid penalty weight: lambda must be nonnegative, got {got}")]
    InvalidPenalty { got: f64 },
    #[error("invalid radius: delta must be nonnegative, got {got}")]
    InvalidRadius { got: f64 },
    #[error("invalid error factor: must be positive, got {got}")]
    InvalidFactor { got: f64 },
    #[error("limit law is unbounded: {what}")]
    UnboundedLaw { what: &'static str },
    #[error("rho <= 1: use the rho = 1 sampler (sample_rbar_one) instead")]
    UseRbarOne,
    #[error("rank-deficient or underdetermined system: {what}")]
    RankError { what: String },
    #[error("numeric bracketing failed: {what}")]
    NumericBracket { what: String },
    #[error("configuration error: {what}")]
    Config { what: String },
    #[error("csv error at {path}: {what}")]
    Csv { path: String, what: String },
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
