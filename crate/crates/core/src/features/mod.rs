//! Feature engineering: PCA with an explained-variance cutoff, named
//! group fusion, correlation matrices, and model-agnostic feature
//! importance (permutation and sampled Shapley values).

mod correlate;
mod importance;
mod pca;

pub use correlate::{correlation_matrix, CorrelationMatrix, CorrelationMethod};
pub use importance::{
    permutation_importance, shapley_sampled, ImportanceEntry, ImportanceMethod,
    ImportanceReport, ShapleyReport,
};
pub use pca::{fuse_groups, pca_fit, pca_transform, FeatureGroupPlan, PcaModel};

use crate::learners::LearnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("need at least 2 rows, got {0}")]
    DegenerateInput(usize),
    #[error("wrong pipeline stage: expected {expected}, got {got}")]
    WrongStage {
        expected: &'static str,
        got: &'static str,
    },
    #[error("column mismatch: {0}")]
    ColumnMismatch(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("invalid group plan: {0}")]
    InvalidPlan(String),
    #[error("retention must be in (0, 1], got {0}")]
    InvalidRetention(f64),
    #[error("empty background set")]
    EmptyBackground,
    #[error(transparent)]
    Learn(#[from] LearnError),
}
