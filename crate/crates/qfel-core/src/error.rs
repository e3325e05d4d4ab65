//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by configuration validation, numerics, and analysis.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration is structurally invalid (missing or inconsistent fields).
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure failed to meet its tolerance or to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The requested quantity does not exist because the configuration has
    /// no gain (detuning outside the amplification bandwidth).
    #[error("no gain: {0}")]
    NoGain(String),

    /// A curve-analysis step could not produce a result from the given data.
    #[error("analysis error: {0}")]
    Analysis(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn no_gain(msg: impl Into<String>) -> Self {
        Error::NoGain(msg.into())
    }

    pub(crate) fn analysis(msg: impl Into<String>) -> Self {
        Error::Analysis(msg.into())
    }
}
