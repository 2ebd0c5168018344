//! Combine three base learners: weighted averaging with weights
//! proportional to cross-validation accuracy, or stacking with a logistic
//! meta-model trained on out-of-fold base predictions (no row ever scored
//! by a model that saw it in training).

use crate::ingest::{FeatureMatrix, Stage};
use crate::learners::{
    kfold_cv, kfold_partition, train, LearnError, LearnerSpec, MetricId, Predictor, Task,
    TrainedModel,
};
use crate::seed::derive_seed2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("accuracy {0} is not in (0, 1]")]
    NonPositiveAccuracy(f64),
    #[error("expected {expected} entries, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("too few rows: have {rows}, need {needed}")]
    TooFewRows { rows: usize, needed: usize },
    #[error("fusion serialization: {0}")]
    Serialization(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FusionMode {
    WeightedAverage,
    Stacking,
}

impl FusionMode {
    pub fn name(self) -> &'static str {
        match self {
            FusionMode::WeightedAverage => "weighted_average",
            FusionMode::Stacking => "stacking",
        }
    }
}

/// Three base learners plus either normalized weights or a logistic
/// meta-model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionModel {
    /// Base models in spec order (conventionally SVM, RF, GBT).
    pub base: Vec<TrainedModel>,
    /// Non-negative, summing to 1. Drives WeightedAverage mode; uniform
    /// placeholder under Stacking.
    pub weights: Vec<f64>,
    pub meta: Option<TrainedModel>,
    pub mode: FusionMode,
    /// CV accuracies behind `weights` when fitted by cross-validation.
    pub cv_accuracies: Vec<f64>,
}

/// Normalize accuracies into convex weights: w_i = a_i / sum(a).
pub fn weights_from_accuracy(accuracies: &[f64]) -> Result<Vec<f64>, FusionError> {
    if accuracies.is_empty() {
        return Err(FusionError::WrongArity {
            expected: 1,
            got: 0,
        });
    }
    for &a in accuracies {
        if !(a > 0.0 && a <= 1.0) {
            return Err(FusionError::NonPositiveAccuracy(a));
        }
    }
    let total: f64 = accuracies.iter().sum();
    Ok(accuracies.iter().map(|a| a / total).collect())
}

fn check_three(specs: &[LearnerSpec]) -> Result<(), FusionError> {
    if specs.len() != 3 {
        return Err(FusionError::WrongArity {
            expected: 3,
            got: specs.len(),
        });
    }
    Ok(())
}

/// Score each base learner by k-fold CV accuracy, weight proportionally,
/// and refit every base on the full training data.
pub fn fit_weighted(
    specs: &[LearnerSpec],
    fm: &FeatureMatrix,
    target: &[f64],
    k: usize,
    seed: u64,
) -> Result<FusionModel, FusionError> {
    check_three(specs)?;
    let task = Task::BinaryClassification;
    let mut accuracies = Vec::with_capacity(3);
    for spec in specs {
        let cv = kfold_cv(spec, fm, target, task, k, MetricId::Accuracy, seed)?;
        accuracies.push(cv.mean);
    }
    let base = refit_all(specs, fm, target)?;
    FusionModel::weighted_from_parts(base, &accuracies)
}

impl FusionModel {
    /// Assemble a weighted-average fusion from already-trained bases and
    /// externally supplied accuracies.
    pub fn weighted_from_parts(
        base: Vec<TrainedModel>,
        accuracies: &[f64],
    ) -> Result<FusionModel, FusionError> {
        if base.len() != accuracies.len() {
            return Err(FusionError::WrongArity {
                expected: base.len(),
                got: accuracies.len(),
            });
        }
        let weights = weights_from_accuracy(accuracies)?;
        Ok(FusionModel {
            base,
            weights,
            meta: None,
            mode: FusionMode::WeightedAverage,
            cv_accuracies: accuracies.to_vec(),
        })
    }
}

/// Out-of-fold meta-features: row r is scored by base models trained on
/// every fold except r's. Returns the rows x 3 matrix and each row's fold
/// index, for leakage audits.
pub fn oof_meta_features(
    specs: &[LearnerSpec],
    fm: &FeatureMatrix,
    target: &[f64],
    k: usize,
    seed: u64,
) -> Result<(FeatureMatrix, Vec<usize>), FusionError> {
    check_three(specs)?;
    let n = fm.rows();
    if n < 2 * k {
        return Err(FusionError::TooFewRows {
            rows: n,
            needed: 2 * k,
        });
    }
    let task = Task::BinaryClassification;
    let folds = kfold_partition(n, k, seed)?;
    let mut fold_of = vec![0usize; n];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            fold_of[i] = f;
        }
    }

    let names: Vec<String> = specs
        .iter()
        .enumerate()
        .map(|(i, s)| format!("base{}_{}", i + 1, s.kind().name()))
        .collect();
    let mut meta = vec![vec![0.0; n]; 3];
    for (f, fold) in folds.iter().enumerate() {
        let mut train_idx: Vec<usize> = (0..n).filter(|i| fold_of[*i] != f).collect();
        train_idx.sort_unstable();
        let train_x = fm.select_rows(&train_idx);
        let train_y: Vec<f64> = train_idx.iter().map(|&i| target[i]).collect();
        let held_x = fm.select_rows(fold);
        for (s, spec) in specs.iter().enumerate() {
            let model = train(spec, &train_x, &train_y, task)?;
            let scores = model.predict(&held_x)?;
            for (&row, score) in fold.iter().zip(scores) {
                meta[s][row] = score;
            }
        }
    }

    let columns: Vec<(String, Vec<f64>)> = names.into_iter().zip(meta).collect();
    let matrix = FeatureMatrix::new(columns, Stage::Encoded, fm.row_keys().to_vec())
        .expect("meta matrix shape");
    Ok((matrix, fold_of))
}

/// Stacking: logistic meta-model over out-of-fold base predictions, base
/// models refit on all data.
pub fn fit_stacking(
    specs: &[LearnerSpec],
    fm: &FeatureMatrix,
    target: &[f64],
    k: usize,
    seed: u64,
) -> Result<FusionModel, FusionError> {
    let (meta_features, _) = oof_meta_features(specs, fm, target, k, seed)?;
    let meta_spec = LearnerSpec::logistic_default().with_seed(derive_seed2(seed, 3, 0));
    let meta = train(
        &meta_spec,
        &meta_features,
        target,
        Task::BinaryClassification,
    )?;
    let base = refit_all(specs, fm, target)?;
    let n_base = base.len();
    Ok(FusionModel {
        base,
        weights: vec![1.0 / n_base as f64; n_base],
        meta: Some(meta),
        mode: FusionMode::Stacking,
        cv_accuracies: Vec::new(),
    })
}

fn refit_all(
    specs: &[LearnerSpec],
    fm: &FeatureMatrix,
    target: &[f64],
) -> Result<Vec<TrainedModel>, FusionError> {
    specs
        .iter()
        .map(|s| Ok(train(s, fm, target, Task::BinaryClassification)?))
        .collect()
}

impl FusionModel {
    fn base_scores(&self, fm: &FeatureMatrix) -> Result<Vec<Vec<f64>>, FusionError> {
        self.base
            .iter()
            .map(|m| Ok(m.predict(fm)?))
            .collect()
    }

    pub fn predict(&self, fm: &FeatureMatrix) -> Result<Vec<f64>, FusionError> {
        let scores = self.base_scores(fm)?;
        match self.mode {
            FusionMode::WeightedAverage => {
                let mut out = vec![0.0; fm.rows()];
                for (w, col) in self.weights.iter().zip(&scores) {
                    for (o, s) in out.iter_mut().zip(col) {
                        *o += w * s;
                    }
                }
                Ok(out)
            }
            FusionMode::Stacking => {
                let meta = self.meta.as_ref().expect("stacking mode has a meta model");
                let columns: Vec<(String, Vec<f64>)> = meta
                    .feature_names
                    .iter()
                    .cloned()
                    .zip(scores)
                    .collect();
                let fm_meta =
                    FeatureMatrix::new(columns, Stage::Encoded, fm.row_keys().to_vec())
                        .expect("meta matrix shape");
                Ok(meta.predict(&fm_meta)?)
            }
        }
    }

    pub fn to_json(&self) -> String {
        let envelope = FusionEnvelope {
            format_version: crate::learners::MODEL_FORMAT_VERSION,
            fusion: self.clone(),
        };
        serde_json::to_string_pretty(&envelope).expect("fusion serializes")
    }

    pub fn from_json(text: &str) -> Result<FusionModel, FusionError> {
        let envelope: FusionEnvelope = serde_json::from_str(text)
            .map_err(|e| FusionError::Serialization(e.to_string()))?;
        if envelope.format_version != crate::learners::MODEL_FORMAT_VERSION {
            return Err(FusionError::Serialization(format!(
                "unsupported fusion format version {}",
                envelope.format_version
            )));
        }
        Ok(envelope.fusion)
    }
}

#[derive(Serialize, Deserialize)]
struct FusionEnvelope {
    format_version: u32,
    fusion: FusionModel,
}

impl Predictor for FusionModel {
    fn feature_names(&self) -> &[String] {
        self.base[0].feature_names()
    }

    fn predict_matrix(&self, fm: &FeatureMatrix) -> Result<Vec<f64>, LearnError> {
        self.predict(fm).map_err(|e| match e {
            FusionError::Learn(inner) => inner,
            other => LearnError::ColumnMismatch(other.to_string()),
        })
    }
}
