//! Feature encoding: one-hot expansion of categorical columns and
//! column standardization.

use super::{
    CellValue, ColumnKind, FeatureMatrix, IngestError, MatchDataset, RowKey, Stage,
    IDENTIFIER_COLUMNS,
};
use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

/// Expand a cleaned dataset into a numeric matrix.
///
/// Each categorical column with k distinct values becomes k indicator
/// columns named `<col>=<value>` (first-appearance order); numeric columns
/// pass through. `server` and `point_victor` stay single ordinal columns
/// (1.0 for P1, 2.0 for P2). Identifier columns become row keys, not
/// features.
pub fn one_hot(ds: &MatchDataset) -> Result<FeatureMatrix, IngestError> {
    if !ds.is_clean() {
        return Err(IngestError::NotCleaned);
    }
    let records: Vec<_> = ds.records().collect();
    if records.is_empty() {
        return Err(IngestError::EmptyFile);
    }
    let row_keys: Vec<RowKey> = records
        .iter()
        .map(|r| RowKey {
            match_id: r.match_id.clone(),
            set_no: r.set_no,
            game_no: r.game_no,
            point_no: r.point_no,
        })
        .collect();

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for info in &ds.column_catalog {
        let name = info.name.as_str();
        if IDENTIFIER_COLUMNS.contains(&name) {
            continue;
        }
        match info.kind {
            ColumnKind::Numeric => {
                let mut values = Vec::with_capacity(records.len());
                for r in &records {
                    values.push(numeric_feature(r, name)?);
                }
                columns.push((name.to_string(), values));
            }
            ColumnKind::Categorical => {
                let mut categories: IndexSet<String> = IndexSet::new();
                let cells: Vec<String> = records
                    .iter()
                    .map(|r| categorical_feature(r, name))
                    .collect::<Result<_, _>>()?;
                for c in &cells {
                    categories.insert(c.clone());
                }
                for category in &categories {
                    let values = cells
                        .iter()
                        .map(|c| if c == category { 1.0 } else { 0.0 })
                        .collect();
                    columns.push((format!("{name}={category}"), values));
                }
            }
        }
    }

    FeatureMatrix::new(columns, Stage::Encoded, row_keys)
}

fn numeric_feature(r: &super::PointRecord, name: &str) -> Result<f64, IngestError> {
    let value = match name {
        "set_no" => Some(r.set_no as f64),
        "game_no" => Some(r.game_no as f64),
        "point_no" => Some(r.point_no as f64),
        "server" => Some(r.server.ordinal()),
        "point_victor" => Some(r.point_victor.ordinal()),
        "p1_sets" => Some(r.p1_sets as f64),
        "p2_sets" => Some(r.p2_sets as f64),
        "p1_points_won" => Some(r.p1_points_won as f64),
        "p2_points_won" => Some(r.p2_points_won as f64),
        "speed_mph" => r.speed_mph,
        "rally_count" => r.rally_count.map(|v| v as f64),
        "p1_distance_run" => r.p1_distance_run,
        "p2_distance_run" => r.p2_distance_run,
        other => match r.extra.get(other) {
            Some(Some(CellValue::Num(v))) => Some(*v),
            _ => None,
        },
    };
    value.ok_or_else(|| {
        IngestError::Shape(format!(
            "numeric column `{name}` has a gap after cleaning"
        ))
    })
}

fn categorical_feature(r: &super::PointRecord, name: &str) -> Result<String, IngestError> {
    let value = match name {
        "return_depth" => r.return_depth.clone(),
        other => match r.extra.get(other) {
            Some(Some(CellValue::Cat(s))) => Some(s.clone()),
            Some(Some(CellValue::Num(v))) => Some(v.to_string()),
            _ => None,
        },
    };
    value.ok_or_else(|| {
        IngestError::Shape(format!(
            "categorical column `{name}` has a gap after cleaning"
        ))
    })
}

/// Per-column centering/scaling parameters fitted by [`standardize`],
/// reusable on held-out data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub entries: Vec<ScalerEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerEntry {
    pub name: String,
    pub mean: f64,
    /// Population standard deviation; 0 marks a constant column whose
    /// output is all zeros.
    pub std: f64,
}

impl Scaler {
    /// Apply fitted parameters to another encoded matrix with the same
    /// columns.
    pub fn apply(&self, fm: &FeatureMatrix) -> Result<FeatureMatrix, IngestError> {
        if fm.stage() != Stage::Encoded {
            return Err(IngestError::WrongStage {
                expected: Stage::Encoded.name(),
                got: fm.stage().name(),
            });
        }
        let names = fm.column_names();
        let expected: Vec<&str> = self.entries.iter().map(|e| e.name.as_str()).collect();
        if names != expected {
            return Err(IngestError::Shape(format!(
                "scaler columns {expected:?} do not match matrix columns {names:?}"
            )));
        }
        let columns = self
            .entries
            .iter()
            .map(|e| {
                let values = fm
                    .column(&e.name)
                    .expect("validated above")
                    .iter()
                    .map(|&x| {
                        if e.std == 0.0 {
                            0.0
                        } else {
                            (x - e.mean) / e.std
                        }
                    })
                    .collect();
                (e.name.clone(), values)
            })
            .collect();
        fm.replace_columns(columns, Stage::Standardized)
    }
}

/// Transform each column to zero mean and unit population standard
/// deviation. Constant columns map to all zeros.
pub fn standardize(fm: &FeatureMatrix) -> Result<(FeatureMatrix, Scaler), IngestError> {
    if fm.stage() != Stage::Encoded {
        return Err(IngestError::WrongStage {
            expected: Stage::Encoded.name(),
            got: fm.stage().name(),
        });
    }
    let n = fm.rows();
    if n == 0 {
        return Err(IngestError::Shape("cannot standardize 0 rows".to_string()));
    }
    let mut entries = Vec::with_capacity(fm.n_columns());
    for (name, values) in fm.columns() {
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        // Guard against float dust on constant columns.
        let std = if std <= 1e-12 * (1.0 + mean.abs()) {
            0.0
        } else {
            std
        };
        entries.push(ScalerEntry {
            name: name.to_string(),
            mean,
            std,
        });
    }
    let scaler = Scaler { entries };
    let standardized = scaler.apply(fm)?;
    Ok((standardized, scaler))
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_csv_reader;
    use super::*;

    fn encoded(text: &str) -> FeatureMatrix {
        let ds = parse_csv_reader(text.as_bytes(), None).unwrap();
        one_hot(&ds).unwrap()
    }

    #[test]
    fn categorical_becomes_indicators() {
        let fm = encoded(
            "match_id,set_no,game_no,point_no,server,point_victor,c\n\
             m1,1,1,1,1,1,F\n\
             m1,1,1,2,1,1,B\n\
             m1,1,1,3,1,1,F\n",
        );
        assert_eq!(fm.column("c=F").unwrap(), &[1.0, 0.0, 1.0]);
        assert_eq!(fm.column("c=B").unwrap(), &[0.0, 1.0, 0.0]);
        assert_eq!(fm.stage(), Stage::Encoded);
    }

    #[test]
    fn single_category_column() {
        let fm = encoded(
            "match_id,set_no,game_no,point_no,server,point_victor,c\n\
             m1,1,1,1,1,1,X\n\
             m1,1,1,2,1,1,X\n",
        );
        assert_eq!(fm.column("c=X").unwrap(), &[1.0, 1.0]);
    }

    #[test]
    fn numeric_only_passthrough_and_ordinal_players() {
        let fm = encoded(
            "match_id,set_no,game_no,point_no,server,point_victor\n\
             m1,1,1,1,1,2\n\
             m1,1,1,2,2,1\n",
        );
        assert_eq!(
            fm.column_names(),
            vec!["set_no", "game_no", "point_no", "server", "point_victor"]
        );
        assert_eq!(fm.column("server").unwrap(), &[1.0, 2.0]);
        assert_eq!(fm.column("point_victor").unwrap(), &[2.0, 1.0]);
    }

    #[test]
    fn identifiers_are_keys_not_features() {
        let fm = encoded(
            "match_id,player1,player2,set_no,game_no,point_no,server,point_victor\n\
             m1,A,B,1,1,1,1,1\n",
        );
        assert!(fm.column_names().iter().all(|n| !n.starts_with("match_id")
            && !n.starts_with("player1")
            && !n.starts_with("player2")));
        assert_eq!(fm.row_keys()[0].match_id, "m1");
    }

    #[test]
    fn one_hot_requires_clean_data() {
        let ds = parse_csv_reader(
            "match_id,set_no,game_no,point_no,server,point_victor,speed_mph\n\
             m1,1,1,1,1,1,\n\
             m1,1,1,2,1,1,100\n"
                .as_bytes(),
            None,
        )
        .unwrap();
        assert!(matches!(one_hot(&ds), Err(IngestError::NotCleaned)));
    }

    #[test]
    fn indicator_rows_sum_to_one() {
        let fm = encoded(
            "match_id,set_no,game_no,point_no,server,point_victor,c\n\
             m1,1,1,1,1,1,a\n\
             m1,1,1,2,1,1,b\n\
             m1,1,1,3,1,1,c\n\
             m1,1,1,4,1,1,a\n",
        );
        let group: Vec<&[f64]> = ["c=a", "c=b", "c=c"]
            .iter()
            .map(|n| fm.column(n).unwrap())
            .collect();
        for i in 0..fm.rows() {
            let sum: f64 = group.iter().map(|col| col[i]).sum();
            assert_eq!(sum, 1.0);
        }
    }

    #[test]
    fn standardize_basic() {
        let fm = FeatureMatrix::from_columns(
            vec![("x".to_string(), vec![2.0, 4.0])],
            Stage::Encoded,
        )
        .unwrap();
        let (out, scaler) = standardize(&fm).unwrap();
        assert_eq!(out.column("x").unwrap(), &[-1.0, 1.0]);
        assert_eq!(scaler.entries[0].mean, 3.0);
        assert_eq!(scaler.entries[0].std, 1.0);
        assert_eq!(out.stage(), Stage::Standardized);
    }

    #[test]
    fn standardize_constant_column_to_zeros() {
        let fm = FeatureMatrix::from_columns(
            vec![("x".to_string(), vec![5.0, 5.0, 5.0])],
            Stage::Encoded,
        )
        .unwrap();
        let (out, scaler) = standardize(&fm).unwrap();
        assert_eq!(out.column("x").unwrap(), &[0.0, 0.0, 0.0]);
        assert_eq!(scaler.entries[0].std, 0.0);
    }

    #[test]
    fn standardize_fixed_point() {
        let vals = vec![-1.0, 1.0];
        let fm = FeatureMatrix::from_columns(
            vec![("x".to_string(), vals.clone())],
            Stage::Encoded,
        )
        .unwrap();
        let (out, _) = standardize(&fm).unwrap();
        for (a, b) in out.column("x").unwrap().iter().zip(&vals) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaler_reuse_on_held_out_rows() {
        let train = FeatureMatrix::from_columns(
            vec![("x".to_string(), vec![2.0, 4.0])],
            Stage::Encoded,
        )
        .unwrap();
        let (_, scaler) = standardize(&train).unwrap();
        let test = FeatureMatrix::from_columns(
            vec![("x".to_string(), vec![3.0, 5.0])],
            Stage::Encoded,
        )
        .unwrap();
        let out = scaler.apply(&test).unwrap();
        assert_eq!(out.column("x").unwrap(), &[0.0, 2.0]);

        let wrong = FeatureMatrix::from_columns(
            vec![("y".to_string(), vec![1.0])],
            Stage::Encoded,
        )
        .unwrap();
        assert!(scaler.apply(&wrong).is_err());
    }
}
