//! Column-major feature matrix with provenance stage and row keys.

use super::IngestError;
use serde::{Deserialize, Serialize};

/// Provenance of the values in a [`FeatureMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    Raw,
    Encoded,
    Standardized,
    Reduced,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Raw => "RAW",
            Stage::Encoded => "ENCODED",
            Stage::Standardized => "STANDARDIZED",
            Stage::Reduced => "REDUCED",
        }
    }
}

/// Identifies the point a matrix row came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowKey {
    pub match_id: String,
    pub set_no: u32,
    pub game_no: u32,
    pub point_no: u32,
}

impl RowKey {
    pub fn synthetic(i: usize) -> RowKey {
        RowKey {
            match_id: "synthetic".to_string(),
            set_no: 1,
            game_no: 1,
            point_no: i as u32 + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Named numeric columns over points. Every column holds exactly
/// `rows()` values and `row_keys` preserves record order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    columns: Vec<Column>,
    stage: Stage,
    row_keys: Vec<RowKey>,
}

impl FeatureMatrix {
    /// Build from named columns, validating the shape.
    pub fn new(
        columns: Vec<(String, Vec<f64>)>,
        stage: Stage,
        row_keys: Vec<RowKey>,
    ) -> Result<FeatureMatrix, IngestError> {
        let rows = row_keys.len();
        for (name, values) in &columns {
            if values.len() != rows {
                return Err(IngestError::Shape(format!(
                    "column `{name}` has {} values, expected {rows}",
                    values.len()
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(IngestError::Shape(format!(
                    "column `{name}` contains a non-finite value"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (name, _) in &columns {
            if !seen.insert(name.clone()) {
                return Err(IngestError::Shape(format!("duplicate column `{name}`")));
            }
        }
        Ok(FeatureMatrix {
            columns: columns
                .into_iter()
                .map(|(name, values)| Column { name, values })
                .collect(),
            stage,
            row_keys,
        })
    }

    /// Build with synthetic row keys; convenient for tests and generated data.
    pub fn from_columns(
        columns: Vec<(String, Vec<f64>)>,
        stage: Stage,
    ) -> Result<FeatureMatrix, IngestError> {
        let rows = columns.first().map(|(_, v)| v.len()).unwrap_or(0);
        let keys = (0..rows).map(RowKey::synthetic).collect();
        FeatureMatrix::new(columns, stage, keys)
    }

    pub fn rows(&self) -> usize {
        self.row_keys.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn row_keys(&self) -> &[RowKey] {
        &self.row_keys
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.columns
            .iter()
            .map(|c| (c.name.as_str(), c.values.as_slice()))
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn column_at(&self, idx: usize) -> (&str, &[f64]) {
        let c = &self.columns[idx];
        (c.name.as_str(), c.values.as_slice())
    }

    /// Gather one row across all columns.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    /// Row-major copy; learners iterate rows far more often than columns.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| self.row(i)).collect()
    }

    /// New matrix keeping only the given row indices, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    values: idx.iter().map(|&i| c.values[i]).collect(),
                })
                .collect(),
            stage: self.stage,
            row_keys: idx.iter().map(|&i| self.row_keys[i].clone()).collect(),
        }
    }

    /// Remove a column, returning its values and the remaining matrix.
    /// Used to split a label column out of an encoded matrix.
    pub fn extract_column(&self, name: &str) -> Result<(Vec<f64>, FeatureMatrix), IngestError> {
        let pos = self
            .columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| IngestError::UnknownColumn(name.to_string()))?;
        let mut columns = self.columns.clone();
        let target = columns.remove(pos);
        Ok((
            target.values,
            FeatureMatrix {
                columns,
                stage: self.stage,
                row_keys: self.row_keys.clone(),
            },
        ))
    }

    pub(crate) fn replace_columns(
        &self,
        columns: Vec<(String, Vec<f64>)>,
        stage: Stage,
    ) -> Result<FeatureMatrix, IngestError> {
        FeatureMatrix::new(columns, stage, self.row_keys.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_validation() {
        let err = FeatureMatrix::from_columns(
            vec![
                ("a".to_string(), vec![1.0, 2.0]),
                ("b".to_string(), vec![1.0]),
            ],
            Stage::Encoded,
        );
        assert!(matches!(err, Err(IngestError::Shape(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let err =
            FeatureMatrix::from_columns(vec![("a".to_string(), vec![f64::NAN])], Stage::Encoded);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_duplicate_names() {
        let err = FeatureMatrix::from_columns(
            vec![
                ("a".to_string(), vec![1.0]),
                ("a".to_string(), vec![2.0]),
            ],
            Stage::Encoded,
        );
        assert!(err.is_err());
    }

    #[test]
    fn select_and_extract() {
        let fm = FeatureMatrix::from_columns(
            vec![
                ("x".to_string(), vec![1.0, 2.0, 3.0]),
                ("y".to_string(), vec![4.0, 5.0, 6.0]),
            ],
            Stage::Encoded,
        )
        .unwrap();
        let sel = fm.select_rows(&[2, 0]);
        assert_eq!(sel.column("x").unwrap(), &[3.0, 1.0]);
        assert_eq!(sel.rows(), 2);

        let (y, rest) = fm.extract_column("y").unwrap();
        assert_eq!(y, vec![4.0, 5.0, 6.0]);
        assert_eq!(rest.column_names(), vec!["x"]);
        assert!(rest.column("y").is_none());
    }
}
