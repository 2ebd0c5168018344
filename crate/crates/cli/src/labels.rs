//! Build (features, binary labels) from a dataset bundle.
//!
//! Two label sources: an existing binary column of the encoded matrix
//! (its two distinct values map to 0/1, smaller first), or
//! `next-point-victor`, where each row is labeled 1 if P1 wins the next
//! point of the same match and each match's final point is dropped.

use crate::bundle::DatasetBundle;
use anyhow::{bail, Result};
use mlab_core::ingest::{standardize, FeatureMatrix, Player};
use serde::{Deserialize, Serialize};

pub const NEXT_POINT_VICTOR: &str = "next-point-victor";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpec(pub String);

impl Default for LabelSpec {
    fn default() -> Self {
        LabelSpec(NEXT_POINT_VICTOR.to_string())
    }
}

/// Standardized features and aligned binary labels.
pub fn build_labeled_features(
    bundle: &DatasetBundle,
    label: &LabelSpec,
) -> Result<(FeatureMatrix, Vec<f64>)> {
    let (encoded, labels) = if label.0 == NEXT_POINT_VICTOR {
        next_point_victor(bundle)?
    } else {
        from_column(&bundle.encoded, &label.0)?
    };
    let (standardized, _) = standardize(&encoded)?;
    Ok((standardized, labels))
}

fn from_column(encoded: &FeatureMatrix, column: &str) -> Result<(FeatureMatrix, Vec<f64>)> {
    let (raw, features) = encoded.extract_column(column)?;
    let mut distinct: Vec<f64> = raw.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite labels"));
    distinct.dedup();
    if distinct.len() != 2 {
        bail!(
            "label column `{column}` must take exactly 2 distinct values, found {}",
            distinct.len()
        );
    }
    let hi = distinct[1];
    let labels = raw.iter().map(|&v| f64::from(v == hi)).collect();
    Ok((features, labels))
}

fn next_point_victor(bundle: &DatasetBundle) -> Result<(FeatureMatrix, Vec<f64>)> {
    let encoded = &bundle.encoded;
    let mut keep_rows = Vec::new();
    let mut labels = Vec::new();
    let mut row = 0usize;
    for points in bundle.dataset.matches.values() {
        for (i, _) in points.iter().enumerate() {
            if i + 1 < points.len() {
                keep_rows.push(row);
                labels.push(f64::from(points[i + 1].point_victor == Player::P1));
            }
            row += 1;
        }
    }
    if row != encoded.rows() {
        return Err(crate::errors::Internal(format!(
            "dataset has {row} records but encoded matrix has {} rows",
            encoded.rows()
        ))
        .into());
    }
    if keep_rows.is_empty() {
        bail!("no rows left after dropping each match's final point");
    }
    Ok((encoded.select_rows(&keep_rows), labels))
}
