//! Model-agnostic feature importance.
//!
//! Permutation importance shuffles one column at a time and measures the
//! metric change. Shapley values use the permutation-sampling estimator:
//! for each sampled feature ordering, features before the target take the
//! explained row's values and the rest come from a sampled background
//! row; the marginal prediction changes telescope to
//! f(x) - f(background).

use super::FeatureError;
use crate::ingest::FeatureMatrix;
use crate::learners::{evaluate, MetricId, Predictor, Task};
use crate::seed::{derive_seed, derive_seed2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImportanceMethod {
    Permutation,
    ShapleySampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub name: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub entries: Vec<ImportanceEntry>,
    pub method: ImportanceMethod,
    pub baseline_metric: f64,
    pub n_repeats: usize,
    pub seed: u64,
}

impl ImportanceReport {
    /// Entries sorted by descending |score|.
    pub fn ranked(&self) -> Vec<&ImportanceEntry> {
        let mut out: Vec<&ImportanceEntry> = self.entries.iter().collect();
        out.sort_by(|a, b| b.score.abs().partial_cmp(&a.score.abs()).unwrap());
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,score\n");
        for e in &self.entries {
            out.push_str(&format!("{},{}\n", e.name, e.score));
        }
        out
    }
}

/// Mean metric shift when one column is shuffled, per column. A positive
/// score on an error metric means the feature carries information.
pub fn permutation_importance(
    model: &dyn Predictor,
    fm: &FeatureMatrix,
    target: &[f64],
    task: Task,
    metric: MetricId,
    n_permutations: usize,
    seed: u64,
) -> Result<ImportanceReport, FeatureError> {
    if n_permutations == 0 {
        return Err(FeatureError::InvalidPlan(
            "n_permutations must be at least 1".to_string(),
        ));
    }
    let baseline_predictions = model.predict_matrix(fm)?;
    let baseline = metric.extract(&evaluate(&baseline_predictions, target, task)?)?;

    let names: Vec<String> = fm.column_names().iter().map(|s| s.to_string()).collect();
    let mut entries = Vec::with_capacity(names.len());
    for (f, name) in names.iter().enumerate() {
        let mut shift_sum = 0.0;
        for p in 0..n_permutations {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed2(seed, f as u64, p as u64));
            let mut columns: Vec<(String, Vec<f64>)> = fm
                .columns()
                .map(|(n, v)| (n.to_string(), v.to_vec()))
                .collect();
            columns[f].1.shuffle(&mut rng);
            let shuffled = FeatureMatrix::new(columns, fm.stage(), fm.row_keys().to_vec())
                .expect("same shape as input");
            let predictions = model.predict_matrix(&shuffled)?;
            let score = metric.extract(&evaluate(&predictions, target, task)?)?;
            shift_sum += score - baseline;
        }
        entries.push(ImportanceEntry {
            name: name.clone(),
            score: shift_sum / n_permutations as f64,
        });
    }

    Ok(ImportanceReport {
        entries,
        method: ImportanceMethod::Permutation,
        baseline_metric: baseline,
        n_repeats: n_permutations,
        seed,
    })
}

/// Sampled Shapley attribution for a single row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyReport {
    pub entries: Vec<ImportanceEntry>,
    /// f(x) minus the mean prediction over the sampled background rows;
    /// the scores sum to this exactly.
    pub explained_delta: f64,
    /// Standard error of `explained_delta` as an estimate of
    /// f(x) - mean background prediction; infinite for a single sample.
    pub efficiency_std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl ShapleyReport {
    pub fn score(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.score)
    }

    pub fn score_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.score).sum()
    }
}

pub fn shapley_sampled(
    model: &dyn Predictor,
    background: &FeatureMatrix,
    x: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<ShapleyReport, FeatureError> {
    if background.rows() == 0 {
        return Err(FeatureError::EmptyBackground);
    }
    if n_samples == 0 {
        return Err(FeatureError::InvalidPlan(
            "n_samples must be at least 1".to_string(),
        ));
    }
    let d = background.n_columns();
    if x.len() != d {
        return Err(FeatureError::ColumnMismatch(format!(
            "row has {} values, background has {d} columns",
            x.len()
        )));
    }

    let names: Vec<String> = background
        .column_names()
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut totals = vec![0.0; d];
    let mut deltas = Vec::with_capacity(n_samples);

    for s in 0..n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, s as u64));
        let b = background.row(rng.random_range(0..background.rows()));
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(&mut rng);

        let mut z = b.clone();
        let mut prev = predict_one(model, background, &z)?;
        let first = prev;
        for &feature in &order {
            z[feature] = x[feature];
            let next = predict_one(model, background, &z)?;
            totals[feature] += next - prev;
            prev = next;
        }
        deltas.push(prev - first); // f(x) - f(b), telescoped
    }

    let entries = names
        .into_iter()
        .zip(&totals)
        .map(|(name, t)| ImportanceEntry {
            name,
            score: t / n_samples as f64,
        })
        .collect();
    let mean_delta = deltas.iter().sum::<f64>() / n_samples as f64;
    let std_error = if n_samples > 1 {
        let var = deltas
            .iter()
            .map(|v| (v - mean_delta).powi(2))
            .sum::<f64>()
            / (n_samples - 1) as f64;
        (var / n_samples as f64).sqrt()
    } else {
        f64::INFINITY
    };

    Ok(ShapleyReport {
        entries,
        explained_delta: mean_delta,
        efficiency_std_error: std_error,
        n_samples,
        seed,
    })
}

fn predict_one(
    model: &dyn Predictor,
    template: &FeatureMatrix,
    row: &[f64],
) -> Result<f64, FeatureError> {
    let columns: Vec<(String, Vec<f64>)> = template
        .column_names()
        .iter()
        .zip(row)
        .map(|(n, v)| (n.to_string(), vec![*v]))
        .collect();
    let fm = FeatureMatrix::from_columns(columns, template.stage())
        .expect("single row is well-formed");
    Ok(model.predict_matrix(&fm)?[0])
}
