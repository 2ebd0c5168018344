//! `mlab ingest`: parse -> clean -> encode -> standardize, emitting the
//! dataset bundle.

use crate::bundle::{DatasetBundle, BUNDLE_FORMAT_VERSION};
use crate::io::write_atomic;
use anyhow::{Context, Result};
use mlab_core::ingest::{clean, one_hot, parse_csv, standardize, CleanPolicy};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub drop_threshold: f64,
}

pub fn run(cfg: &IngestConfig) -> Result<Vec<PathBuf>> {
    let ds = parse_csv(&cfg.input, None)
        .with_context(|| format!("ingesting {}", cfg.input.display()))?;
    let policy = CleanPolicy {
        column_drop_threshold: cfg.drop_threshold,
    };
    let (dataset, clean_report) = clean(&ds, &policy)?;
    let encoded = one_hot(&dataset)?;
    let (standardized, scaler) = standardize(&encoded)?;

    let bundle = DatasetBundle {
        format_version: BUNDLE_FORMAT_VERSION,
        dataset,
        encoded,
        standardized,
        scaler,
        clean_report,
    };
    write_atomic(&cfg.out, &bundle.to_json())?;
    Ok(vec![cfg.out.clone()])
}
