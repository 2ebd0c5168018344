//! Base learners built from scratch: linear SVM, random forest,
//! gradient-boosted trees, and a logistic-regression meta-learner, plus
//! metrics, cross-validation, and hyperparameter search. Every fit is
//! bit-deterministic given (spec, data).

pub mod forest;
mod gbt;
mod linear;
mod metrics;
pub mod tree;

mod cv;

pub use cv::{kfold_cv, kfold_partition, split_train_test, tune_rounds, CvResult, TrainTestSplit};
pub use forest::ForestParams;
pub use gbt::{GbtFit, GbtParams};
pub use linear::{LogisticParams, SvmParams};
pub use metrics::{evaluate, MetricId, MetricSet};

use crate::ingest::FeatureMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("classification label {0} is not 0 or 1")]
    LabelOutOfDomain(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("column mismatch: {0}")]
    ColumnMismatch(String),
    #[error("too few rows: have {rows}, need {needed}")]
    TooFewRows { rows: usize, needed: usize },
    #[error("invalid learner spec: {0}")]
    InvalidSpec(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("metric `{0}` is undefined on this data")]
    MetricUndefined(&'static str),
    #[error("{kind} does not support {task}")]
    UnsupportedTask {
        kind: &'static str,
        task: &'static str,
    },
    #[error("model serialization: {0}")]
    Serialization(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    BinaryClassification,
    Regression,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::BinaryClassification => "binary classification",
            Task::Regression => "regression",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LearnerKind {
    SvmLinear,
    RandomForest,
    Gbt,
    Logistic,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::SvmLinear => "svm_linear",
            LearnerKind::RandomForest => "random_forest",
            LearnerKind::Gbt => "gbt",
            LearnerKind::Logistic => "logistic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    SvmLinear(SvmParams),
    RandomForest(ForestParams),
    Gbt(GbtParams),
    Logistic(LogisticParams),
}

impl ModelParams {
    pub fn kind(&self) -> LearnerKind {
        match self {
            ModelParams::SvmLinear(_) => LearnerKind::SvmLinear,
            ModelParams::RandomForest(_) => LearnerKind::RandomForest,
            ModelParams::Gbt(_) => LearnerKind::Gbt,
            ModelParams::Logistic(_) => LearnerKind::Logistic,
        }
    }
}

/// Which learner to train, with what hyperparameters and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub params: ModelParams,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn kind(&self) -> LearnerKind {
        self.params.kind()
    }

    pub fn with_seed(mut self, seed: u64) -> LearnerSpec {
        self.seed = seed;
        self
    }

    pub fn svm_default() -> LearnerSpec {
        LearnerSpec {
            params: ModelParams::SvmLinear(SvmParams::default()),
            seed: 0,
        }
    }

    pub fn random_forest_default(n_trees: usize) -> LearnerSpec {
        LearnerSpec {
            params: ModelParams::RandomForest(ForestParams {
                n_trees,
                ..ForestParams::default()
            }),
            seed: 0,
        }
    }

    pub fn gbt_default() -> LearnerSpec {
        LearnerSpec {
            params: ModelParams::Gbt(GbtParams::default()),
            seed: 0,
        }
    }

    pub fn gbt_with(num_round: usize, learning_rate: f64, max_depth: usize) -> LearnerSpec {
        LearnerSpec {
            params: ModelParams::Gbt(GbtParams {
                num_round,
                learning_rate,
                max_depth,
                min_samples_leaf: 1,
            }),
            seed: 0,
        }
    }

    pub fn logistic_default() -> LearnerSpec {
        LearnerSpec {
            params: ModelParams::Logistic(LogisticParams::default()),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |msg: String| Err(LearnError::InvalidSpec(msg));
        match &self.params {
            ModelParams::SvmLinear(p) => {
                if p.c <= 0.0 {
                    return bad(format!("svm c must be positive, got {}", p.c));
                }
                if p.epochs == 0 {
                    return bad("svm epochs must be positive".to_string());
                }
                if p.eta0 <= 0.0 {
                    return bad(format!("svm eta0 must be positive, got {}", p.eta0));
                }
            }
            ModelParams::RandomForest(p) => {
                if p.n_trees == 0 {
                    return bad("n_trees must be positive".to_string());
                }
                if p.min_samples_leaf == 0 {
                    return bad("min_samples_leaf must be positive".to_string());
                }
                if !(p.feature_subsample > 0.0 && p.feature_subsample <= 1.0) {
                    return bad(format!(
                        "feature_subsample must be in (0, 1], got {}",
                        p.feature_subsample
                    ));
                }
            }
            ModelParams::Gbt(p) => {
                if p.num_round == 0 {
                    return bad("num_round must be at least 1".to_string());
                }
                if !(p.learning_rate > 0.0 && p.learning_rate <= 1.0) {
                    return bad(format!(
                        "learning_rate must be in (0, 1], got {}",
                        p.learning_rate
                    ));
                }
                if p.min_samples_leaf == 0 {
                    return bad("min_samples_leaf must be positive".to_string());
                }
            }
            ModelParams::Logistic(p) => {
                if p.epochs == 0 {
                    return bad("logistic epochs must be positive".to_string());
                }
                if !(p.learning_rate > 0.0 && p.learning_rate <= 1.0) {
                    return bad(format!(
                        "learning_rate must be in (0, 1], got {}",
                        p.learning_rate
                    ));
                }
                if p.l2_penalty < 0.0 {
                    return bad(format!(
                        "l2_penalty must be non-negative, got {}",
                        p.l2_penalty
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum FittedParams {
    Svm(linear::LinearFit),
    Forest(forest::ForestFit),
    Gbt(GbtFit),
    Logistic(linear::LinearFit),
}

/// A fitted learner bound to the column names it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: LearnerSpec,
    pub task: Task,
    pub feature_names: Vec<String>,
    fitted: FittedParams,
}

/// Anything that can score the rows of a feature matrix. Implemented by
/// trained base learners and fusion models; tests substitute stubs.
pub trait Predictor {
    fn feature_names(&self) -> &[String];
    fn predict_matrix(&self, fm: &FeatureMatrix) -> Result<Vec<f64>, LearnError>;
}

pub fn train(
    spec: &LearnerSpec,
    fm: &FeatureMatrix,
    target: &[f64],
    task: Task,
) -> Result<TrainedModel, LearnError> {
    spec.validate()?;
    if fm.rows() == 0 {
        return Err(LearnError::EmptyTrainingSet);
    }
    if target.len() != fm.rows() {
        return Err(LearnError::LengthMismatch {
            expected: fm.rows(),
            got: target.len(),
        });
    }
    if task == Task::BinaryClassification {
        if let Some(bad) = target.iter().find(|y| **y != 0.0 && **y != 1.0) {
            return Err(LearnError::LabelOutOfDomain(*bad));
        }
    }
    if task == Task::Regression
        && matches!(
            spec.kind(),
            LearnerKind::SvmLinear | LearnerKind::Logistic
        )
    {
        return Err(LearnError::UnsupportedTask {
            kind: spec.kind().name(),
            task: task.name(),
        });
    }

    let rows = fm.to_rows();
    let fitted = match &spec.params {
        ModelParams::SvmLinear(p) => FittedParams::Svm(linear::fit_svm(p, &rows, target)),
        ModelParams::RandomForest(p) => {
            FittedParams::Forest(forest::fit(p, &rows, target, task, spec.seed))
        }
        ModelParams::Gbt(p) => FittedParams::Gbt(gbt::fit(p, &rows, target, task)),
        ModelParams::Logistic(p) => {
            FittedParams::Logistic(linear::fit_logistic(p, &rows, target))
        }
    };

    Ok(TrainedModel {
        spec: spec.clone(),
        task,
        feature_names: fm.column_names().iter().map(|s| s.to_string()).collect(),
        fitted,
    })
}

impl TrainedModel {
    /// Score every row. Classification scores live in [0, 1].
    pub fn predict(&self, fm: &FeatureMatrix) -> Result<Vec<f64>, LearnError> {
        let names = fm.column_names();
        if names != self.feature_names.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(LearnError::ColumnMismatch(format!(
                "model expects {:?}, got {names:?}",
                self.feature_names
            )));
        }
        let mut out = Vec::with_capacity(fm.rows());
        for i in 0..fm.rows() {
            let row = fm.row(i);
            out.push(self.predict_row(&row));
        }
        Ok(out)
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.fitted {
            FittedParams::Svm(f) => f.score(row),
            FittedParams::Forest(f) => f.predict_row(row),
            FittedParams::Gbt(f) => f.predict_row(row),
            FittedParams::Logistic(f) => f.score(row),
        }
    }

    /// Per-round training loss, present for GBT models.
    pub fn gbt_train_loss(&self) -> Option<&[f64]> {
        match &self.fitted {
            FittedParams::Gbt(f) => Some(&f.train_loss),
            _ => None,
        }
    }

    /// Versioned JSON document for save/load.
    pub fn to_json(&self) -> String {
        let envelope = ModelEnvelope {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&envelope).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, LearnError> {
        let envelope: ModelEnvelope = serde_json::from_str(text)
            .map_err(|e| LearnError::Serialization(e.to_string()))?;
        if envelope.format_version != MODEL_FORMAT_VERSION {
            return Err(LearnError::Serialization(format!(
                "unsupported model format version {}",
                envelope.format_version
            )));
        }
        Ok(envelope.model)
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelEnvelope {
    format_version: u32,
    model: TrainedModel,
}

impl Predictor for TrainedModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict_matrix(&self, fm: &FeatureMatrix) -> Result<Vec<f64>, LearnError> {
        self.predict(fm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Stage;

    fn xy(n: usize) -> (FeatureMatrix, Vec<f64>) {
        let fm = FeatureMatrix::from_columns(
            vec![("x".to_string(), (0..n).map(|i| i as f64).collect())],
            Stage::Standardized,
        )
        .unwrap();
        let y = (0..n).map(|i| if i * 2 >= n { 1.0 } else { 0.0 }).collect();
        (fm, y)
    }

    #[test]
    fn constant_target_constant_prediction() {
        let fm = FeatureMatrix::from_columns(
            vec![("x".to_string(), vec![1.0, 2.0, 3.0, 4.0])],
            Stage::Standardized,
        )
        .unwrap();
        let y = vec![1.0; 4];
        for spec in [
            LearnerSpec::svm_default(),
            LearnerSpec::random_forest_default(5),
            LearnerSpec::gbt_with(3, 1.0, 2),
            LearnerSpec::logistic_default(),
        ] {
            let model = train(&spec, &fm, &y, Task::BinaryClassification).unwrap();
            let scores = model.predict(&fm).unwrap();
            for s in scores {
                assert!(
                    s.round() == 1.0,
                    "{:?} failed to learn the constant label: {s}",
                    spec.kind()
                );
            }
        }
    }

    #[test]
    fn exact_fit_gbt_predicts_labels() {
        let fm = FeatureMatrix::from_columns(
            vec![("x".to_string(), vec![0.0, 1.0])],
            Stage::Standardized,
        )
        .unwrap();
        let spec = LearnerSpec::gbt_with(1, 1.0, 1);
        let model = train(&spec, &fm, &[0.0, 1.0], Task::Regression).unwrap();
        assert_eq!(model.predict(&fm).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn empty_matrix_predicts_empty() {
        let (fm, y) = xy(6);
        let model = train(
            &LearnerSpec::random_forest_default(3),
            &fm,
            &y,
            Task::BinaryClassification,
        )
        .unwrap();
        let empty = fm.select_rows(&[]);
        assert!(model.predict(&empty).unwrap().is_empty());
    }

    #[test]
    fn label_domain_enforced() {
        let (fm, _) = xy(4);
        let err = train(
            &LearnerSpec::logistic_default(),
            &fm,
            &[0.0, 1.0, 2.0, 1.0],
            Task::BinaryClassification,
        );
        assert!(matches!(err, Err(LearnError::LabelOutOfDomain(v)) if v == 2.0));
    }

    #[test]
    fn empty_training_set_rejected() {
        let (fm, _) = xy(4);
        let empty = fm.select_rows(&[]);
        assert!(matches!(
            train(
                &LearnerSpec::logistic_default(),
                &empty,
                &[],
                Task::BinaryClassification
            ),
            Err(LearnError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn margin_learners_reject_regression() {
        let (fm, y) = xy(4);
        assert!(matches!(
            train(&LearnerSpec::svm_default(), &fm, &y, Task::Regression),
            Err(LearnError::UnsupportedTask { .. })
        ));
    }

    #[test]
    fn column_mismatch_on_predict() {
        let (fm, y) = xy(6);
        let model = train(
            &LearnerSpec::logistic_default(),
            &fm,
            &y,
            Task::BinaryClassification,
        )
        .unwrap();
        let other = FeatureMatrix::from_columns(
            vec![("z".to_string(), vec![1.0])],
            Stage::Standardized,
        )
        .unwrap();
        assert!(matches!(
            model.predict(&other),
            Err(LearnError::ColumnMismatch(_))
        ));
    }

    #[test]
    fn training_is_bit_deterministic() {
        let (fm, y) = xy(24);
        for spec in [
            LearnerSpec::svm_default().with_seed(5),
            LearnerSpec::random_forest_default(8).with_seed(5),
            LearnerSpec::gbt_with(6, 0.5, 3).with_seed(5),
            LearnerSpec::logistic_default().with_seed(5),
        ] {
            let a = train(&spec, &fm, &y, Task::BinaryClassification).unwrap();
            let b = train(&spec, &fm, &y, Task::BinaryClassification).unwrap();
            assert_eq!(a, b, "{:?} not deterministic", spec.kind());
        }
    }

    #[test]
    fn json_round_trip() {
        let (fm, y) = xy(10);
        let model = train(
            &LearnerSpec::gbt_with(4, 0.5, 2),
            &fm,
            &y,
            Task::BinaryClassification,
        )
        .unwrap();
        let text = model.to_json();
        let back = TrainedModel::from_json(&text).unwrap();
        assert_eq!(model, back);
        assert_eq!(back.predict(&fm).unwrap(), model.predict(&fm).unwrap());
    }

    #[test]
    fn spec_validation() {
        let mut spec = LearnerSpec::gbt_default();
        if let ModelParams::Gbt(p) = &mut spec.params {
            p.learning_rate = 1.5;
        }
        assert!(matches!(
            spec.validate(),
            Err(LearnError::InvalidSpec(_))
        ));
        assert!(LearnerSpec::gbt_default().validate().is_ok());
    }
}
