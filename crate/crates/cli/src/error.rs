use serde_json::json;
use sigtamper_core::export::ExportError;
use sigtamper_core::{AdversaryError, ControlError, ExpandError, ScenarioError, SolverError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let kind = match self {
            CliError::Input(_) => "invalid_input",
            CliError::Internal(_) => "internal",
        };
        json!({ "error": kind, "message": self.to_string() }).to_string()
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ExpandError> for CliError {
    fn from(e: ExpandError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ExportError> for CliError {
    fn from(e: ExportError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<ControlError> for CliError {
    fn from(e: ControlError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<AdversaryError> for CliError {
    fn from(e: AdversaryError) -> Self {
        match e {
            // Gadgets with more than one lane are outside the model.
            AdversaryError::NonUnitGadget { .. } => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}
