//! Run manifests: a JSON record of the exact command, parameters, and
//! produced files, sufficient to reproduce a run bit for bit.

use crate::{CliError, Command};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub created: String,
    pub command: Command,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &Command, outputs: Vec<String>) -> Self {
        Self {
            tool: "asep-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            created: chrono::Utc::now().to_rfc3339(),
            command: command.clone(),
            outputs,
        }
    }

    pub fn write(&self, path: &str) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::usage(format!("manifest serialization: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("manifest parse error: {e}")))
    }
}
