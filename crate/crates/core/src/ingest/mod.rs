//! Parse point-by-point match CSVs into validated records, clean missing
//! values, and encode/standardize features.
//!
//! The canonical input schema follows a Grand Slam point log: one row per
//! point with identifiers (`match_id`, `set_no`, `game_no`, `point_no`),
//! the serving and winning player, running score counters, and optional
//! physical covariates (serve speed, rally length, distance run). Unknown
//! columns are preserved and typed by inference.

mod clean;
mod encode;
mod matrix;
mod parse;

pub use clean::{clean, CleanPolicy, CleanReport};
pub use encode::{one_hot, standardize, Scaler};
pub use matrix::{FeatureMatrix, RowKey, Stage};
pub use parse::{parse_csv, parse_csv_reader, write_csv, write_csv_string, SchemaOverrides};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

/// Columns that must be present in every input file.
pub const REQUIRED_COLUMNS: [&str; 6] = [
    "match_id",
    "set_no",
    "game_no",
    "point_no",
    "server",
    "point_victor",
];

/// Identifier columns excluded from feature encoding; they key rows
/// instead of describing them.
pub const IDENTIFIER_COLUMNS: [&str; 3] = ["match_id", "player1", "player2"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty file: no data rows")]
    EmptyFile,
    #[error("missing required column `{0}`")]
    MissingRequiredColumn(String),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("no numeric feature column survived cleaning")]
    AllColumnsDropped,
    #[error("invalid clean policy: {0}")]
    InvalidPolicy(String),
    #[error("dataset has missing values; run clean first")]
    NotCleaned,
    #[error("column shape mismatch: {0}")]
    Shape(String),
    #[error("wrong pipeline stage: expected {expected}, got {got}")]
    WrongStage {
        expected: &'static str,
        got: &'static str,
    },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
}

/// One of the two players in a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }

    /// Ordinal encoding used in feature matrices: P1 -> 1.0, P2 -> 2.0.
    pub fn ordinal(self) -> f64 {
        match self {
            Player::P1 => 1.0,
            Player::P2 => 2.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::P1 => 0,
            Player::P2 => 1,
        }
    }
}

/// Declared or inferred type of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// A typed cell of an extra (non-canonical) column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellValue {
    Num(f64),
    Cat(String),
}

/// Catalog entry: column name, kind, and how many records lack a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnInfo {
    pub name: String,
    pub kind: ColumnKind,
    pub missing_count: usize,
}

/// One point of one match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub match_id: String,
    pub player1: String,
    pub player2: String,
    pub set_no: u32,
    pub game_no: u32,
    pub point_no: u32,
    pub server: Player,
    pub point_victor: Player,
    pub p1_sets: u32,
    pub p2_sets: u32,
    pub p1_points_won: u32,
    pub p2_points_won: u32,
    pub speed_mph: Option<f64>,
    pub rally_count: Option<u32>,
    pub p1_distance_run: Option<f64>,
    pub p2_distance_run: Option<f64>,
    pub return_depth: Option<String>,
    /// Additional named columns in file order; `None` marks a missing cell.
    pub extra: IndexMap<String, Option<CellValue>>,
}

impl PointRecord {
    /// Ordering key within a match.
    pub fn key(&self) -> (u32, u32, u32) {
        (self.set_no, self.game_no, self.point_no)
    }
}

/// All matches of one input file, keyed by match id in first-appearance
/// order, with a catalog of every column seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDataset {
    pub matches: IndexMap<String, Vec<PointRecord>>,
    pub column_catalog: Vec<ColumnInfo>,
}

impl MatchDataset {
    /// Iterate all records in dataset order (match insertion order, then
    /// point order).
    pub fn records(&self) -> impl Iterator<Item = &PointRecord> {
        self.matches.values().flatten()
    }

    pub fn n_records(&self) -> usize {
        self.matches.values().map(Vec::len).sum()
    }

    pub fn n_matches(&self) -> usize {
        self.matches.len()
    }

    pub fn column(&self, name: &str) -> Option<&ColumnInfo> {
        self.column_catalog.iter().find(|c| c.name == name)
    }

    /// True when no surviving column has a missing value.
    pub fn is_clean(&self) -> bool {
        self.column_catalog.iter().all(|c| c.missing_count == 0)
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Minimal record for unit tests; only identifiers and outcome vary.
    pub fn record(match_id: &str, set: u32, game: u32, point: u32) -> PointRecord {
        PointRecord {
            match_id: match_id.to_string(),
            player1: "A".to_string(),
            player2: "B".to_string(),
            set_no: set,
            game_no: game,
            point_no: point,
            server: Player::P1,
            point_victor: Player::P1,
            p1_sets: 0,
            p2_sets: 0,
            p1_points_won: 0,
            p2_points_won: 0,
            speed_mph: None,
            rally_count: None,
            p1_distance_run: None,
            p2_distance_run: None,
            return_depth: None,
            extra: IndexMap::new(),
        }
    }
}
