//! Error taxonomy shared by the whole crate.
//!
//! Variants are grouped by how a caller should react: `Domain`, `Parse`,
//! `Range`, `Window`, `DegenerateSample`, `Fit` and `Fixture` mean the
//! request itself cannot be answered; `Resource` and `Plan` mean a budget
//! (enumeration size, precision bits) was exceeded before starting;
//! `IndeterminateSign` is the honest "the estimate is too coarse to certify
//! the sign" diagnostic — never a silently wrong sign.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed textual input; the message names the offending position.
    #[error("parse error: {0}")]
    Parse(String),

    /// Index beyond what was computed (e.g. a cylinder depth past the
    /// available partial quotients).
    #[error("range error: {0}")]
    Range(String),

    /// A digit window was exhausted before the queried run ended.
    #[error("run exceeds window: {0}")]
    Window(String),

    /// The sampled point cannot support the queried expansion (terminating
    /// orbit, exhausted continued fraction).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// Exhaustive enumeration or computation budget exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A sampling plan violates its precision budget.
    #[error("sample plan error: {0}")]
    Plan(String),

    /// Not enough usable data points for a requested fit.
    #[error("fit error: {0}")]
    Fit(String),

    /// A numerical sign could not be certified at the available accuracy.
    #[error("indeterminate sign: {0}")]
    IndeterminateSign(String),

    /// A bundled constant failed its integrity check.
    #[error("fixture integrity error: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;
