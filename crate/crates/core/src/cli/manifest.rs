use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CliError, Format};

/// Everything needed to reproduce a run. Stored at the top of every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub format: Format,
    pub version: String,
    /// File names, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn version_string() -> String {
        format!("retroloop {}", env!("CARGO_PKG_VERSION"))
    }

    /// Extracts the manifest from any file the CLI wrote.
    pub fn from_output_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        Self::from_output_text(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
    }

    pub fn from_output_text(text: &str) -> Result<Self, String> {
        let first = text.lines().next().unwrap_or_default();
        let value: serde_json::Value = if let Some(rest) = first.strip_prefix(CSV_MANIFEST_PREFIX) {
            serde_json::from_str(rest).map_err(|e| e.to_string())?
        } else if let Ok(v) = serde_json::from_str::<serde_json::Value>(text) {
            v.get("manifest").cloned().ok_or("no manifest in JSON file")?
        } else {
            let header: serde_json::Value = serde_json::from_str(first).map_err(|e| e.to_string())?;
            header.get("manifest").cloned().ok_or("no manifest in header line")?
        };
        serde_json::from_value(value).map_err(|e| e.to_string())
    }
}

pub(crate) const CSV_MANIFEST_PREFIX: &str = "# manifest ";
