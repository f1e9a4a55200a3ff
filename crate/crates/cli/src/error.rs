use std::path::Path;

use thiserror::Error;

use aerosurvey_core::emi::EmiError;
use aerosurvey_core::grid::GridError;
use aerosurvey_core::model::ModelError;
use aerosurvey_core::pipeline::{FailureKind, PipelineError};
use aerosurvey_core::qc::QcError;
use aerosurvey_core::sim::SimError;
use aerosurvey_core::vibration::VibrationError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const IO: u8 = 2;
    pub const QC_FAIL: u8 = 3;
    pub const INTERNAL: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io(_) => exit::IO,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<VibrationError> for CliError {
    fn from(e: VibrationError) -> Self {
        match e {
            VibrationError::NonPositiveParameter { .. }
            | VibrationError::InvalidConfig(_)
            | VibrationError::NoCandidates => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<EmiError> for CliError {
    fn from(e: EmiError) -> Self {
        match e {
            EmiError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) | SimError::DegeneratePlan(_) => CliError::Usage(e.to_string()),
            SimError::Io(_) | SimError::Model(_) => CliError::Io(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<QcError> for CliError {
    fn from(e: QcError) -> Self {
        match e {
            QcError::InvalidParameter(_) | QcError::InvalidRank { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::InvalidCellSize(_) | GridError::InvalidParameter(_) => CliError::Usage(e.to_string()),
            GridError::Io(_) | GridError::Parse { .. } => CliError::Io(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let msg = format!("stage {}: {}", e.stage, e.message);
        match e.kind {
            FailureKind::Config => CliError::Usage(msg),
            FailureKind::Io => CliError::Io(msg),
            FailureKind::Internal => CliError::Internal(msg),
        }
    }
}
