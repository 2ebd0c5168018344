//! Missing-value handling.
//!
//! Columns whose missing rate reaches the drop threshold are removed
//! outright; sparser gaps are imputed (per-match median for numeric
//! columns, the sentinel category `UNKNOWN` for categorical ones) so the
//! point sequence stays contiguous.

use super::{CellValue, ColumnKind, IngestError, MatchDataset, PointRecord};
use serde::{Deserialize, Serialize};

pub const UNKNOWN_CATEGORY: &str = "UNKNOWN";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleanPolicy {
    /// Columns missing at least this fraction of values are dropped.
    pub column_drop_threshold: f64,
}

impl Default for CleanPolicy {
    fn default() -> Self {
        CleanPolicy {
            column_drop_threshold: 0.10,
        }
    }
}

/// What `clean` did, for manifests and logs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    pub dropped_columns: Vec<String>,
    pub imputed_numeric_cells: usize,
    pub filled_categorical_cells: usize,
}

pub fn clean(
    ds: &MatchDataset,
    policy: &CleanPolicy,
) -> Result<(MatchDataset, CleanReport), IngestError> {
    let t = policy.column_drop_threshold;
    if !(t > 0.0 && t <= 1.0) {
        return Err(IngestError::InvalidPolicy(format!(
            "column_drop_threshold must be in (0, 1], got {t}"
        )));
    }
    let n = ds.n_records();
    if n == 0 {
        return Err(IngestError::EmptyFile);
    }

    let mut report = CleanReport::default();
    let mut out = ds.clone();

    let dropped: Vec<String> = out
        .column_catalog
        .iter()
        .filter(|c| c.missing_count as f64 / n as f64 >= t)
        .map(|c| c.name.clone())
        .collect();
    for name in &dropped {
        drop_column(&mut out, name);
    }
    report.dropped_columns = dropped;

    if !out
        .column_catalog
        .iter()
        .any(|c| c.kind == ColumnKind::Numeric)
    {
        return Err(IngestError::AllColumnsDropped);
    }

    // Impute what remains.
    let to_fill: Vec<(String, ColumnKind)> = out
        .column_catalog
        .iter()
        .filter(|c| c.missing_count > 0)
        .map(|c| (c.name.clone(), c.kind))
        .collect();
    for (name, kind) in to_fill {
        match kind {
            ColumnKind::Numeric => impute_numeric(&mut out, &name, &mut report),
            ColumnKind::Categorical => fill_categorical(&mut out, &name, &mut report),
        }
    }
    for info in &mut out.column_catalog {
        info.missing_count = 0;
    }
    Ok((out, report))
}

fn drop_column(ds: &mut MatchDataset, name: &str) {
    ds.column_catalog.retain(|c| c.name != name);
    for record in ds.matches.values_mut().flatten() {
        match name {
            "speed_mph" => record.speed_mph = None,
            "rally_count" => record.rally_count = None,
            "p1_distance_run" => record.p1_distance_run = None,
            "p2_distance_run" => record.p2_distance_run = None,
            "return_depth" => record.return_depth = None,
            _ => {
                record.extra.shift_remove(name);
            }
        }
    }
}

fn numeric_value(record: &PointRecord, name: &str) -> Option<f64> {
    match name {
        "speed_mph" => record.speed_mph,
        "rally_count" => record.rally_count.map(|v| v as f64),
        "p1_distance_run" => record.p1_distance_run,
        "p2_distance_run" => record.p2_distance_run,
        _ => match record.extra.get(name) {
            Some(Some(CellValue::Num(v))) => Some(*v),
            _ => None,
        },
    }
}

fn set_numeric(record: &mut PointRecord, name: &str, value: f64) {
    match name {
        "speed_mph" => record.speed_mph = Some(value),
        // Integer column: round the median to the nearest count.
        "rally_count" => record.rally_count = Some(value.round().max(0.0) as u32),
        "p1_distance_run" => record.p1_distance_run = Some(value),
        "p2_distance_run" => record.p2_distance_run = Some(value),
        _ => {
            record
                .extra
                .insert(name.to_string(), Some(CellValue::Num(value)));
        }
    }
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

fn impute_numeric(ds: &mut MatchDataset, name: &str, report: &mut CleanReport) {
    let global = median(
        ds.records()
            .filter_map(|r| numeric_value(r, name))
            .collect(),
    );
    let match_ids: Vec<String> = ds.matches.keys().cloned().collect();
    for match_id in match_ids {
        let points = &ds.matches[&match_id];
        let local = median(points.iter().filter_map(|r| numeric_value(r, name)).collect());
        // Physical covariates vary by match; prefer the match's own median.
        let fill = match local.or(global) {
            Some(v) => v,
            None => continue, // fully missing column survived a threshold of 1.0
        };
        for record in ds.matches.get_mut(&match_id).expect("known match") {
            if numeric_value(record, name).is_none() && has_cell_slot(record, name) {
                set_numeric(record, name, fill);
                report.imputed_numeric_cells += 1;
            }
        }
    }
}

/// Extra columns only exist where the record carries the key; canonical
/// optionals always have a slot.
fn has_cell_slot(record: &PointRecord, name: &str) -> bool {
    matches!(
        name,
        "speed_mph" | "rally_count" | "p1_distance_run" | "p2_distance_run"
    ) || record.extra.contains_key(name)
}

fn fill_categorical(ds: &mut MatchDataset, name: &str, report: &mut CleanReport) {
    for record in ds.matches.values_mut().flatten() {
        if name == "return_depth" {
            if record.return_depth.is_none() {
                record.return_depth = Some(UNKNOWN_CATEGORY.to_string());
                report.filled_categorical_cells += 1;
            }
        } else if let Some(slot @ None) = record.extra.get_mut(name) {
            *slot = Some(CellValue::Cat(UNKNOWN_CATEGORY.to_string()));
            report.filled_categorical_cells += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_csv_reader;
    use super::*;

    fn csv_with_missing(total: usize, missing: usize) -> String {
        let mut text = String::from(
            "match_id,set_no,game_no,point_no,server,point_victor,speed_mph\n",
        );
        for i in 1..=total {
            let speed = if i <= missing { String::new() } else { format!("{}", 100 + i) };
            text.push_str(&format!("m1,1,1,{i},1,1,{speed}\n"));
        }
        text
    }

    #[test]
    fn drops_column_at_threshold() {
        // 48 of 400 missing = 12%, at the default 10% threshold.
        let ds = parse_csv_reader(csv_with_missing(400, 48).as_bytes(), None).unwrap();
        let (cleaned, report) = clean(&ds, &CleanPolicy::default()).unwrap();
        assert_eq!(report.dropped_columns, vec!["speed_mph".to_string()]);
        assert!(cleaned.column("speed_mph").is_none());
        assert!(cleaned.records().all(|r| r.speed_mph.is_none()));
    }

    #[test]
    fn keeps_and_imputes_below_threshold() {
        let ds = parse_csv_reader(csv_with_missing(100, 5).as_bytes(), None).unwrap();
        let (cleaned, report) = clean(&ds, &CleanPolicy::default()).unwrap();
        assert!(report.dropped_columns.is_empty());
        assert_eq!(report.imputed_numeric_cells, 5);
        assert!(cleaned.is_clean());
        assert!(cleaned.records().all(|r| r.speed_mph.is_some()));
    }

    #[test]
    fn per_match_median_imputation() {
        let text = "match_id,set_no,game_no,point_no,server,point_victor,speed_mph\n\
                    m1,1,1,1,1,1,1\n\
                    m1,1,1,2,1,1,\n\
                    m1,1,1,3,1,1,3\n\
                    m2,1,1,1,1,1,100\n\
                    m2,1,1,2,1,1,\n\
                    m2,1,1,3,1,1,200\n\
                    m2,1,1,4,1,1,300\n\
                    m2,1,1,5,1,1,301\n\
                    m2,1,1,6,1,1,302\n\
                    m2,1,1,7,1,1,303\n\
                    m2,1,1,8,1,1,304\n\
                    m2,1,1,9,1,1,305\n\
                    m2,1,1,10,1,1,306\n\
                    m2,1,1,11,1,1,307\n\
                    m2,1,1,12,1,1,308\n\
                    m2,1,1,13,1,1,309\n\
                    m2,1,1,14,1,1,310\n\
                    m2,1,1,15,1,1,311\n\
                    m2,1,1,16,1,1,312\n\
                    m2,1,1,17,1,1,313\n\
                    m2,1,1,18,1,1,314\n\
                    m2,1,1,19,1,1,315\n\
                    m2,1,1,20,1,1,316\n\
                    m2,1,1,21,1,1,317\n\
                    m2,1,1,22,1,1,318\n";
        let ds = parse_csv_reader(text.as_bytes(), None).unwrap();
        let (cleaned, _) = clean(&ds, &CleanPolicy::default()).unwrap();
        // m1 gap filled from {1, 3} -> 2, not from m2's values.
        assert_eq!(cleaned.matches["m1"][1].speed_mph, Some(2.0));
        // m2 gap filled from m2's own median.
        let m2 = &cleaned.matches["m2"][1];
        assert!(m2.speed_mph.unwrap() >= 100.0);
    }

    #[test]
    fn clean_is_idempotent_and_identity_on_complete_data() {
        let ds = parse_csv_reader(csv_with_missing(50, 0).as_bytes(), None).unwrap();
        let (once, report) = clean(&ds, &CleanPolicy::default()).unwrap();
        assert_eq!(once, ds);
        assert_eq!(report, CleanReport::default());

        let ds = parse_csv_reader(csv_with_missing(100, 5).as_bytes(), None).unwrap();
        let (once, _) = clean(&ds, &CleanPolicy::default()).unwrap();
        let (twice, second) = clean(&once, &CleanPolicy::default()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(second, CleanReport::default());
    }

    #[test]
    fn categorical_gap_becomes_unknown() {
        let text = "match_id,set_no,game_no,point_no,server,point_victor,return_depth\n\
                    m1,1,1,1,1,1,D\n\
                    m1,1,1,2,1,1,\n\
                    m1,1,1,3,1,1,ND\n\
                    m1,1,1,4,1,1,D\n\
                    m1,1,1,5,1,1,D\n\
                    m1,1,1,6,1,1,ND\n\
                    m1,1,1,7,1,1,D\n\
                    m1,1,1,8,1,1,D\n\
                    m1,1,1,9,1,1,ND\n\
                    m1,1,1,10,1,1,D\n\
                    m1,1,1,11,1,1,D\n";
        let ds = parse_csv_reader(text.as_bytes(), None).unwrap();
        let (cleaned, report) = clean(&ds, &CleanPolicy::default()).unwrap();
        assert_eq!(report.filled_categorical_cells, 1);
        assert_eq!(
            cleaned.matches["m1"][1].return_depth.as_deref(),
            Some(UNKNOWN_CATEGORY)
        );
    }

    #[test]
    fn all_columns_dropped_error() {
        use super::super::{ColumnInfo, MatchDataset};
        use indexmap::IndexMap;
        // Hand-built dataset whose only numeric column is fully missing.
        let mut record = crate::ingest::testutil::record("m1", 1, 1, 1);
        record.extra.insert("xcol".to_string(), None);
        let mut matches = IndexMap::new();
        matches.insert("m1".to_string(), vec![record]);
        let ds = MatchDataset {
            matches,
            column_catalog: vec![ColumnInfo {
                name: "xcol".to_string(),
                kind: ColumnKind::Numeric,
                missing_count: 1,
            }],
        };
        assert!(matches!(
            clean(&ds, &CleanPolicy::default()),
            Err(IngestError::AllColumnsDropped)
        ));
    }

    #[test]
    fn invalid_threshold_rejected() {
        let ds = parse_csv_reader(csv_with_missing(10, 0).as_bytes(), None).unwrap();
        let bad = CleanPolicy {
            column_drop_threshold: 0.0,
        };
        assert!(matches!(
            clean(&ds, &bad),
            Err(IngestError::InvalidPolicy(_))
        ));
    }
}
