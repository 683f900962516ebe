//! Library backing the `qfi-workbench` binary: model-source resolution,
//! command implementations, and output encoding. The binary in `main.rs` is
//! a thin argument-parsing layer over [`commands`].

pub mod commands;
pub mod model_source;
pub mod output;

use qfi_workbench::WorkbenchError;

/// Failures split by exit-code class: configuration problems exit 2,
/// runtime/check failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        Self::Config(e.to_string())
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        Self::Runtime(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Runtime(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl From<WorkbenchError> for CliError {
    fn from(e: WorkbenchError) -> Self {
        match &e {
            WorkbenchError::InvalidArgument(_)
            | WorkbenchError::ModelFormat { .. }
            | WorkbenchError::ExpressionSyntax { .. }
            | WorkbenchError::DimensionCap { .. }
            | WorkbenchError::DirectionNorm { .. } => Self::Config(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}
