//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation
    /// (e.g. a non-positive duration for a diffusion kernel).
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a singular time, e.g. the free-particle kernel at t = 0.
    #[error("singular time: {0}")]
    Singularity(String),

    /// The harmonic quantum kernel diverges at omega*t = n*pi.
    #[error("caustic: |sin(omega*t)| = {sin_abs:.3e} < 1e-12 (omega*t near a multiple of pi)")]
    Caustic { sin_abs: f64 },

    /// Two fields/matrices built on different grids were combined.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The requested operation does not support this specification variant.
    #[error("unsupported spec: {0}")]
    UnsupportedSpec(String),

    /// A field with (numerically) zero total mass where moments are requested.
    #[error("degenerate field: {0}")]
    DegenerateField(String),

    /// Unknown verification scenario name.
    #[error("unknown scenario: {0}")]
    UnknownScenario(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
