//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Failure modes of the library.
///
/// Variants mirror the distinct error classes of the public contracts:
/// shape mismatches, invalid scalar parameters, non-finite data, calling a
/// model-specific operation in the wrong model, and undefined metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Dimension or shape mismatch.
    Dims(String),
    /// Scalar parameter outside its admissible range.
    Param(String),
    /// Non-finite value encountered (NaN/Inf), with provenance.
    Numeric(String),
    /// Operation invoked in a solver model that does not support it.
    Mode(String),
    /// Metric has no defined value for this input (e.g. all-zero spectra).
    MetricUndefined(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dims(m) => write!(f, "DimsError: {m}"),
            Error::Param(m) => write!(f, "ParamError: {m}"),
            Error::Numeric(m) => write!(f, "NumericError: {m}"),
            Error::Mode(m) => write!(f, "ModeError: {m}"),
            Error::MetricUndefined(m) => write!(f, "MetricUndefined: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
