//! Run manifests: every command records its inputs, full effective
//! configuration, and produced outputs. Re-running a manifest (`mlab
//! replay`) reproduces byte-identical CSV/JSON/SVG outputs.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool_version: String,
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub config: crate::commands::CommandConfig,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        inputs: Vec<PathBuf>,
        config: crate::commands::CommandConfig,
        outputs: Vec<PathBuf>,
    ) -> RunManifest {
        RunManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            inputs,
            config,
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let manifest: RunManifest =
            serde_json::from_str(&text).context("parsing manifest JSON")?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            bail!(
                "unsupported manifest format version {}",
                manifest.format_version
            );
        }
        Ok(manifest)
    }
}

/// Manifest path derived from a command's primary output, e.g.
/// `dataset.json` -> `dataset.manifest.json`.
pub fn manifest_path_for(primary_output: &Path) -> PathBuf {
    let stem = primary_output
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "run".to_string());
    primary_output.with_file_name(format!("{stem}.manifest.json"))
}
