//! Scenario runner behind the `qeffect` binary.

pub mod config;
pub mod report;
pub mod scenarios;

use std::fmt;

pub use config::{parse_config_text, ScenarioConfig, Tolerances};
pub use report::{write_outputs, Outcome, Report, Series, Status};
pub use scenarios::{list_scenarios, run, SCENARIOS};

/// Process exit status classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Success,
    Internal,
    InvalidInput,
    Inconclusive,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::Internal => 1,
            Self::InvalidInput => 2,
            Self::Inconclusive => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::InvalidInput,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Internal,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<qeffect::Error> for CliError {
    fn from(e: qeffect::Error) -> Self {
        use qeffect::Error as E;
        let kind = match e {
            E::Inconclusive(_) => ExitKind::Inconclusive,
            E::Serialization(_) | E::MarginalMismatch { .. } | E::InvalidDilation(_) => {
                ExitKind::Internal
            }
            _ => ExitKind::InvalidInput,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::internal(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::internal(format!("json: {e}"))
    }
}
