//! The dataset artifact produced by `mlab ingest` and consumed by every
//! other command: cleaned records plus encoded/standardized matrices and
//! the fitted scaler.

use anyhow::{bail, Context, Result};
use mlab_core::ingest::{CleanReport, FeatureMatrix, MatchDataset, Scaler};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub format_version: u32,
    /// Cleaned point records (no missing values).
    pub dataset: MatchDataset,
    /// One-hot encoded matrix, label columns still present.
    pub encoded: FeatureMatrix,
    /// Standardized version of `encoded`.
    pub standardized: FeatureMatrix,
    pub scaler: Scaler,
    pub clean_report: CleanReport,
}

impl DatasetBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn load(path: &Path) -> Result<DatasetBundle> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading dataset bundle {}", path.display()))?;
        let bundle: DatasetBundle =
            serde_json::from_str(&text).context("parsing dataset bundle JSON")?;
        if bundle.format_version != BUNDLE_FORMAT_VERSION {
            bail!(
                "unsupported dataset format version {}",
                bundle.format_version
            );
        }
        Ok(bundle)
    }
}
