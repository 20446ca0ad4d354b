use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use robolearn::tasks::ExperimentConfig;

use crate::CliError;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checksum {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub metrics_csv: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qtable: Option<PathBuf>,
    pub charts: Vec<PathBuf>,
}

/// Everything needed to rerun a finished run bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: String,
    pub command: RunKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episodes: Option<usize>,
    /// Fully resolved; map entries are built-in names or absolute paths.
    pub config: ExperimentConfig,
    pub maps: Vec<Checksum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qtable_in: Option<Checksum>,
    pub outputs: OutputPaths,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_path_for(metrics_csv: &Path) -> PathBuf {
    let stem = metrics_csv.file_stem().and_then(|s| s.to_str()).unwrap_or("metrics");
    metrics_csv.with_file_name(format!("{stem}.manifest.json"))
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialization is infallible");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            CliError::Runtime(format!(
                "manifest {}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v > u64::from(MANIFEST_VERSION) => {
                return Err(CliError::Runtime(format!(
                    "manifest {}: format version {v} is newer than the supported version {MANIFEST_VERSION}",
                    path.display()
                )))
            }
            Some(_) => {}
            None => {
                return Err(CliError::Runtime(format!(
                    "manifest {}: missing format_version",
                    path.display()
                )))
            }
        }
        serde_json::from_value(value).map_err(|e| CliError::Runtime(format!("manifest {}: {e}", path.display())))
    }
}
