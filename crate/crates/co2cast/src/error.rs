//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by ingestion, preprocessing, modelling and reporting.
#[derive(Debug, Error)]
pub enum Error {
    /// CSV header does not match the expected schema.
    #[error("schema error: expected column `{expected}` at position {position}, found `{found}`")]
    Schema {
        expected: &'static str,
        found: String,
        position: usize,
    },

    /// A data row failed to parse or violated a field constraint.
    #[error("row error at line {line}: {message}")]
    Row { line: u64, message: String },

    /// The same key appeared twice in an input file.
    #[error("duplicate key: country {country}, year {year}")]
    DuplicateKey { country: String, year: i32 },

    /// An energy-source label outside the recognized set.
    #[error("unknown energy source `{label}` at line {line}")]
    UnknownSource { label: String, line: u64 },

    /// Grouped energy shares for a year do not sum to ~1.
    #[error("share sum violation for {country} in {years:?}: grouped shares must total 1 +/- {tolerance}")]
    ShareSum {
        country: String,
        years: Vec<i32>,
        tolerance: f64,
    },

    /// A missing observation with no known neighbor on one side.
    #[error("unfillable gap in {country} at year {year}: no known value on both sides")]
    UnfillableGap { country: String, year: i32 },

    /// Operation needs more observations than were supplied.
    #[error("insufficient data: need at least {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    /// Regression or recursion input was degenerate (e.g. singular matrix).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// MAPE is undefined when an actual value is zero.
    #[error("MAPE undefined: actual value at index {index} is zero")]
    ZeroActual { index: usize },

    /// Optimizer failed to converge within the iteration budget on every start.
    #[error("optimizer did not converge: best objective {objective} at {point:?}")]
    NonConvergence { objective: f64, point: Vec<f64> },

    /// Estimated polynomial has a root on or inside the unit circle.
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// Every candidate configuration failed to fit.
    #[error("all candidate configurations failed: {}", causes.join("; "))]
    ExhaustiveFailure { causes: Vec<String> },

    /// Invalid pipeline or CLI configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
