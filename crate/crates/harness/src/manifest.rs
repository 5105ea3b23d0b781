use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult};
use crate::output::write_atomic;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct FailureCounts {
    /// Replicas that ran out of step budget.
    pub incomplete: u64,
    /// Gated probes or estimates outside tolerance.
    pub gated: u64,
}

/// Completion record of one campaign. Its presence is what makes the
/// outputs listed in it valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub task: String,
    pub seed: u64,
    pub seed_source: String,
    pub parallelism: usize,
    pub started: String,
    pub finished: String,
    pub replicas: u64,
    pub failures: FailureCounts,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
    pub exit_status: i32,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> HarnessResult<()> {
        let mut bytes = serde_json::to_vec_pretty(self).map_err(|e| HarnessError::Io(format!("json: {e}")))?;
        bytes.push(b'\n');
        write_atomic(&dir.join(MANIFEST_NAME), &bytes)
    }

    pub fn read(dir: &Path) -> HarnessResult<Self> {
        let path = dir.join(MANIFEST_NAME);
        let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
