use std::fmt;

use kam_core::KamError;
use serde::Serialize;

/// Process exit codes.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DIVERGENCE: u8 = 3;
pub const EXIT_PROPERTY: u8 = 4;

/// Machine-readable failure; serialized as `{code, stage, message}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: String,
    pub stage: String,
    pub message: String,
    #[serde(skip)]
    pub exit: u8,
}

impl CliError {
    pub fn new(code: &str, stage: &str, message: impl Into<String>, exit: u8) -> Self {
        Self { code: code.into(), stage: stage.into(), message: message.into(), exit }
    }

    pub fn config(stage: &str, message: impl Into<String>) -> Self {
        Self::new("config", stage, message, EXIT_CONFIG)
    }

    pub fn io(stage: &str, err: impl fmt::Display) -> Self {
        Self::new("io", stage, err.to_string(), EXIT_CONFIG)
    }

    /// Maps a pipeline error: input problems exit with 2, numerical failures with 3.
    pub fn kam(stage: &str, err: KamError) -> Self {
        let (code, exit) = match &err {
            KamError::Resonance { .. } => ("resonance", EXIT_CONFIG),
            KamError::InvalidParameter(_) | KamError::InvalidWidth(_) | KamError::DimensionMismatch { .. } => {
                ("invalid_input", EXIT_CONFIG)
            }
            KamError::Format(_) => ("format", EXIT_CONFIG),
            KamError::Divergence { .. } => ("divergence", EXIT_DIVERGENCE),
            KamError::NonConvergence { .. } => ("non_convergence", EXIT_DIVERGENCE),
            KamError::TwistDegenerate { .. } => ("twist_degenerate", EXIT_DIVERGENCE),
            KamError::TranslationTooLarge { .. } => ("translation_too_large", EXIT_DIVERGENCE),
            KamError::OutsideValidity { .. } => ("outside_validity", EXIT_DIVERGENCE),
            KamError::CertificateViolated { .. } => ("certificate_violated", EXIT_DIVERGENCE),
            KamError::TailTooLarge { .. } => ("truncation", EXIT_DIVERGENCE),
            KamError::Divergent(_) => ("divergent_series", EXIT_DIVERGENCE),
            _ => ("numerical", EXIT_DIVERGENCE),
        };
        Self::new(code, stage, err.to_string(), exit)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.stage, self.message)
    }
}

impl std::error::Error for CliError {}
