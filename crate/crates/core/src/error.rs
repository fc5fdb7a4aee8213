//! Crate-wide error type.
//!
//! Every fallible operation reports through [`Error`]; the CLI maps the
//! variants onto process exit codes (validation 2, numeric 3,
//! resource/containment 4).

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the documented domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid argument (bad range, bad combination).
    #[error("argument error: {0}")]
    Argument(String),

    /// A numerical procedure failed or did not converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Kernel evaluated to a non-finite value at a concrete point.
    #[error("numeric error: kernel not finite at ({x}, {y})")]
    KernelNotFinite { x: f64, y: f64 },

    /// Request exceeds the configured memory/size budget.
    #[error("resource error: {0}")]
    Resource(String),

    /// A stochastic run left its guaranteed-valid region and must be
    /// discarded rather than silently biased.
    #[error("containment error: {0}")]
    Containment(String),

    /// Required configuration/metadata missing.
    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag, used by the CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Argument(_) => "argument",
            Error::Numeric(_) => "numeric",
            Error::KernelNotFinite { .. } => "numeric",
            Error::Resource(_) => "resource",
            Error::Containment(_) => "containment",
            Error::Configuration(_) => "configuration",
        }
    }
}
