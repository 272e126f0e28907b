//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building or running a simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value failed validation. Carries the field path and the
    /// violated constraint so CLI users can fix the input directly.
    #[error("config error: {field}: {message}")]
    Config { field: String, message: String },

    /// The requested model is inconsistent (bad level indices, an RF drive that
    /// cannot be absorbed into one rotating frame, drive-count violations, ...).
    #[error("model error: {0}")]
    Model(String),

    /// A numerical procedure failed or exceeded its tolerance.
    #[error("numerical error: {message} (diagnostic {diagnostic:.3e})")]
    Numerical { message: String, diagnostic: f64 },

    /// A result violated a physical constraint it must satisfy (e.g. gain on
    /// the probe transition in a ladder system).
    #[error("physics violation: {0}")]
    Physics(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    pub fn numerical(message: impl Into<String>, diagnostic: f64) -> Self {
        Error::Numerical { message: message.into(), diagnostic }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
