//! CSV parsing and serialization for point logs.
//!
//! Comma-separated, UTF-8, first row is the header, empty string means
//! missing. Unknown columns are kept as `extra` with their kind inferred:
//! numeric when every present cell parses as a finite number, categorical
//! otherwise. An explicit [`SchemaOverrides`] wins over inference.

use super::{
    CellValue, ColumnInfo, ColumnKind, IngestError, MatchDataset, Player, PointRecord,
    REQUIRED_COLUMNS,
};
use indexmap::IndexMap;
use std::io::{Read, Write};
use std::path::Path;

/// Per-column kind overrides for extra (non-canonical) columns.
pub type SchemaOverrides = IndexMap<String, ColumnKind>;

/// Canonical columns handled by dedicated record fields.
const CANONICAL_COLUMNS: [&str; 17] = [
    "match_id",
    "player1",
    "player2",
    "set_no",
    "game_no",
    "point_no",
    "server",
    "point_victor",
    "p1_sets",
    "p2_sets",
    "p1_points_won",
    "p2_points_won",
    "speed_mph",
    "rally_count",
    "p1_distance_run",
    "p2_distance_run",
    "return_depth",
];

fn canonical_kind(name: &str) -> ColumnKind {
    match name {
        "match_id" | "player1" | "player2" | "return_depth" => ColumnKind::Categorical,
        _ => ColumnKind::Numeric,
    }
}

pub fn parse_csv(
    path: impl AsRef<Path>,
    overrides: Option<&SchemaOverrides>,
) -> Result<MatchDataset, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv_reader(file, overrides)
}

pub fn parse_csv_reader(
    reader: impl Read,
    overrides: Option<&SchemaOverrides>,
) -> Result<MatchDataset, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(IngestError::EmptyFile);
    }
    for required in REQUIRED_COLUMNS {
        if !headers.iter().any(|h| h == required) {
            return Err(IngestError::MissingRequiredColumn(required.to_string()));
        }
    }

    // Raw cells first; extra-column kinds need the whole column.
    let mut raw_rows: Vec<(u64, Vec<String>)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != headers.len() {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!(
                    "expected {} fields, found {}",
                    headers.len(),
                    record.len()
                ),
            });
        }
        raw_rows.push((line, record.iter().map(str::to_string).collect()));
    }
    if raw_rows.is_empty() {
        return Err(IngestError::EmptyFile);
    }

    let col_index: IndexMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.as_str(), i))
        .collect();
    let extra_headers: Vec<&String> = headers
        .iter()
        .filter(|h| !CANONICAL_COLUMNS.contains(&h.as_str()))
        .collect();

    // Infer extra kinds.
    let mut extra_kinds: IndexMap<String, ColumnKind> = IndexMap::new();
    for header in &extra_headers {
        let kind = match overrides.and_then(|o| o.get(header.as_str())) {
            Some(k) => *k,
            None => {
                let idx = col_index[header.as_str()];
                let numeric = raw_rows
                    .iter()
                    .map(|(_, cells)| cells[idx].as_str())
                    .filter(|c| !c.is_empty())
                    .all(|c| matches!(c.parse::<f64>(), Ok(v) if v.is_finite()));
                if numeric {
                    ColumnKind::Numeric
                } else {
                    ColumnKind::Categorical
                }
            }
        };
        extra_kinds.insert((*header).clone(), kind);
    }

    let mut missing: IndexMap<String, usize> =
        headers.iter().map(|h| (h.clone(), 0)).collect();
    let mut rows: Vec<(u64, PointRecord)> = Vec::with_capacity(raw_rows.len());
    for (line, cells) in &raw_rows {
        let record = build_record(*line, cells, &col_index, &extra_kinds, &mut missing)?;
        rows.push((*line, record));
    }

    // Group by match, order by (set_no, game_no, point_no).
    let mut matches: IndexMap<String, Vec<(u64, PointRecord)>> = IndexMap::new();
    for (line, record) in rows {
        matches
            .entry(record.match_id.clone())
            .or_default()
            .push((line, record));
    }
    let mut grouped: IndexMap<String, Vec<PointRecord>> = IndexMap::new();
    for (match_id, mut points) in matches {
        points.sort_by_key(|(line, r)| (r.key(), *line));
        for pair in points.windows(2) {
            if pair[0].1.key() == pair[1].1.key() {
                return Err(IngestError::MalformedRow {
                    line: pair[1].0,
                    reason: format!(
                        "duplicate point key {:?} in match `{match_id}`",
                        pair[1].1.key()
                    ),
                });
            }
        }
        grouped.insert(match_id, points.into_iter().map(|(_, r)| r).collect());
    }

    let column_catalog = headers
        .iter()
        .map(|h| ColumnInfo {
            name: h.clone(),
            kind: extra_kinds
                .get(h)
                .copied()
                .unwrap_or_else(|| canonical_kind(h)),
            missing_count: missing[h],
        })
        .collect();

    Ok(MatchDataset {
        matches: grouped,
        column_catalog,
    })
}

fn build_record(
    line: u64,
    cells: &[String],
    col_index: &IndexMap<&str, usize>,
    extra_kinds: &IndexMap<String, ColumnKind>,
    missing: &mut IndexMap<String, usize>,
) -> Result<PointRecord, IngestError> {
    let cell = |name: &str| col_index.get(name).map(|&i| cells[i].as_str());
    let malformed = |reason: String| IngestError::MalformedRow { line, reason };

    let match_id = cell("match_id").unwrap_or("");
    if match_id.is_empty() {
        return Err(malformed("empty match_id".to_string()));
    }

    let req_u32 = |name: &str, min: u32| -> Result<u32, IngestError> {
        let raw = cell(name).unwrap_or("");
        match raw.parse::<u32>() {
            Ok(v) if v >= min => Ok(v),
            _ => Err(IngestError::MalformedRow {
                line,
                reason: format!("cell `{name}`=`{raw}` is not an integer >= {min}"),
            }),
        }
    };
    // Non-optional counters default to 0 when the column is absent, but a
    // present cell must parse.
    let counter = |name: &str| -> Result<u32, IngestError> {
        match cell(name) {
            None => Ok(0),
            Some(_) => req_u32(name, 0),
        }
    };
    let player_cell = |name: &str| -> Result<Player, IngestError> {
        let raw = cell(name).unwrap_or("");
        match raw.to_ascii_lowercase().as_str() {
            "1" | "p1" => Ok(Player::P1),
            "2" | "p2" => Ok(Player::P2),
            _ => Err(IngestError::MalformedRow {
                line,
                reason: format!("cell `{name}`=`{raw}` is not one of 1/2/P1/P2"),
            }),
        }
    };

    let opt_real = |name: &str, missing: &mut IndexMap<String, usize>| -> Option<f64> {
        let raw = cell(name)?;
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Some(v),
            _ => {
                *missing.get_mut(name).unwrap() += 1;
                None
            }
        }
    };
    let opt_count = |name: &str, missing: &mut IndexMap<String, usize>| -> Option<u32> {
        let raw = cell(name)?;
        match raw.parse::<u32>() {
            Ok(v) => Some(v),
            _ => {
                *missing.get_mut(name).unwrap() += 1;
                None
            }
        }
    };

    let return_depth = match cell("return_depth") {
        None => None,
        Some("") => {
            *missing.get_mut("return_depth").unwrap() += 1;
            None
        }
        Some(v) => Some(v.to_string()),
    };

    let mut extra = IndexMap::new();
    for (name, kind) in extra_kinds {
        let raw = cell(name).unwrap_or("");
        let value = if raw.is_empty() {
            *missing.get_mut(name).unwrap() += 1;
            None
        } else {
            match kind {
                ColumnKind::Numeric => match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(CellValue::Num(v)),
                    _ => {
                        *missing.get_mut(name).unwrap() += 1;
                        None
                    }
                },
                ColumnKind::Categorical => Some(CellValue::Cat(raw.to_string())),
            }
        };
        extra.insert(name.clone(), value);
    }

    Ok(PointRecord {
        match_id: match_id.to_string(),
        player1: cell("player1").unwrap_or("").to_string(),
        player2: cell("player2").unwrap_or("").to_string(),
        set_no: req_u32("set_no", 1)?,
        game_no: req_u32("game_no", 1)?,
        point_no: req_u32("point_no", 1)?,
        server: player_cell("server")?,
        point_victor: player_cell("point_victor")?,
        p1_sets: counter("p1_sets")?,
        p2_sets: counter("p2_sets")?,
        p1_points_won: counter("p1_points_won")?,
        p2_points_won: counter("p2_points_won")?,
        speed_mph: opt_real("speed_mph", missing),
        rally_count: opt_count("rally_count", missing),
        p1_distance_run: opt_real("p1_distance_run", missing),
        p2_distance_run: opt_real("p2_distance_run", missing),
        return_depth,
        extra,
    })
}

/// Serialize a dataset back to CSV in catalog column order. Parsing the
/// output with the same kinds reproduces an equal dataset.
pub fn write_csv(ds: &MatchDataset, mut out: impl Write) -> Result<(), IngestError> {
    let text = write_csv_string(ds);
    out.write_all(text.as_bytes()).map_err(|source| IngestError::Io {
        path: "<writer>".into(),
        source,
    })
}

pub fn write_csv_string(ds: &MatchDataset) -> String {
    let mut wtr = csv::WriterBuilder::new().from_writer(Vec::new());
    let header: Vec<&str> = ds.column_catalog.iter().map(|c| c.name.as_str()).collect();
    wtr.write_record(&header).expect("in-memory write");
    for record in ds.records() {
        let cells: Vec<String> = ds
            .column_catalog
            .iter()
            .map(|col| cell_text(record, &col.name))
            .collect();
        wtr.write_record(&cells).expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn cell_text(r: &PointRecord, column: &str) -> String {
    fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
        v.as_ref().map(|x| x.to_string()).unwrap_or_default()
    }
    match column {
        "match_id" => r.match_id.clone(),
        "player1" => r.player1.clone(),
        "player2" => r.player2.clone(),
        "set_no" => r.set_no.to_string(),
        "game_no" => r.game_no.to_string(),
        "point_no" => r.point_no.to_string(),
        "server" => (r.server.ordinal() as u32).to_string(),
        "point_victor" => (r.point_victor.ordinal() as u32).to_string(),
        "p1_sets" => r.p1_sets.to_string(),
        "p2_sets" => r.p2_sets.to_string(),
        "p1_points_won" => r.p1_points_won.to_string(),
        "p2_points_won" => r.p2_points_won.to_string(),
        "speed_mph" => opt(&r.speed_mph),
        "rally_count" => opt(&r.rally_count),
        "p1_distance_run" => opt(&r.p1_distance_run),
        "p2_distance_run" => opt(&r.p2_distance_run),
        "return_depth" => opt(&r.return_depth),
        name => match r.extra.get(name) {
            Some(Some(CellValue::Num(v))) => v.to_string(),
            Some(Some(CellValue::Cat(s))) => s.clone(),
            _ => String::new(),
        },
    }
}
