use thiserror::Error;

use crate::types::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SoiError {
    #[error("invalid waveguide spec: {0}")]
    InvalidSpec(ValidationReport),

    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),

    #[error("OAM sign mu is undefined for m_ell = 0")]
    MuUndefined,

    #[error("no guided mode with |m| = {m_abs}, p = {p} (below cutoff)")]
    NoGuidedMode { m_abs: u32, p: u32 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("adaptive quadrature did not converge (estimate {value:e}, error {error:e})")]
    QuadratureNotConverged { value: f64, error: f64 },

    #[error("operation requires a {expected} profile")]
    WrongProfile { expected: &'static str },

    #[error("intensity pattern has no azimuthal structure")]
    PatternUndefined,

    #[error("basis mismatch on arm {arm}: {detail}")]
    BasisMismatch { arm: u8, detail: String },

    #[error("protocol step {step} failed: waypoint fidelity {fidelity}")]
    ProtocolStepFailed { step: usize, fidelity: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

pub type Result<T> = std::result::Result<T, SoiError>;
