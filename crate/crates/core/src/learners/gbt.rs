//! Gradient-boosted CART trees: stagewise regression trees on residuals,
//! shrunk by the learning rate. Squared loss for regression; logistic
//! loss with Newton leaf steps for binary classification.

use super::tree::{CartConfig, CartTree, SplitCriterion};
use super::Task;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub num_round: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            num_round: 126,
            learning_rate: 0.1,
            max_depth: 4,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtFit {
    /// Initial prediction: target mean (regression) or base-rate log-odds
    /// (classification).
    pub init: f64,
    pub trees: Vec<CartTree>,
    pub learning_rate: f64,
    pub task: Task,
    /// Training loss after each round; squared error or log loss.
    pub train_loss: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

const PROB_EPS: f64 = 1e-8;

pub fn fit(params: &GbtParams, rows: &[Vec<f64>], targets: &[f64], task: Task) -> GbtFit {
    let n = rows.len();
    let config = CartConfig {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        feature_subsample: 1.0,
    };
    let idx: Vec<usize> = (0..n).collect();
    let mean = targets.iter().sum::<f64>() / n as f64;

    let init = match task {
        Task::Regression => mean,
        Task::BinaryClassification => {
            let p = mean.clamp(PROB_EPS, 1.0 - PROB_EPS);
            (p / (1.0 - p)).ln()
        }
    };
    let mut score = vec![init; n];
    let mut trees = Vec::with_capacity(params.num_round);
    let mut train_loss = Vec::with_capacity(params.num_round);

    for _round in 0..params.num_round {
        let residuals: Vec<f64> = match task {
            Task::Regression => targets.iter().zip(&score).map(|(y, f)| y - f).collect(),
            Task::BinaryClassification => targets
                .iter()
                .zip(&score)
                .map(|(y, f)| y - sigmoid(*f))
                .collect(),
        };
        let mut tree = CartTree::fit(
            rows,
            &residuals,
            &idx,
            SplitCriterion::VarianceReduction,
            &config,
            None,
        );
        if task == Task::BinaryClassification {
            newton_leaf_step(&mut tree, rows, &residuals, &score);
        }
        for (i, row) in rows.iter().enumerate() {
            score[i] += params.learning_rate * tree.predict_row(row);
        }
        trees.push(tree);
        train_loss.push(loss(&score, targets, task));
    }

    GbtFit {
        init,
        trees,
        learning_rate: params.learning_rate,
        task,
        train_loss,
    }
}

/// Replace each leaf's mean residual with the Newton step
/// sum(residual) / sum(p(1-p)) over the leaf's training rows.
fn newton_leaf_step(tree: &mut CartTree, rows: &[Vec<f64>], residuals: &[f64], score: &[f64]) {
    let mut numer: HashMap<usize, f64> = HashMap::new();
    let mut denom: HashMap<usize, f64> = HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        let leaf = tree.leaf_index_of(row);
        let p = sigmoid(score[i]);
        *numer.entry(leaf).or_default() += residuals[i];
        *denom.entry(leaf).or_default() += (p * (1.0 - p)).max(PROB_EPS);
    }
    let mut leaves: Vec<usize> = numer.keys().copied().collect();
    leaves.sort_unstable();
    for leaf in leaves {
        tree.set_leaf_value(leaf, numer[&leaf] / denom[&leaf]);
    }
}

fn loss(score: &[f64], targets: &[f64], task: Task) -> f64 {
    let n = targets.len() as f64;
    match task {
        Task::Regression => {
            score
                .iter()
                .zip(targets)
                .map(|(f, y)| (y - f).powi(2))
                .sum::<f64>()
                / n
        }
        Task::BinaryClassification => {
            score
                .iter()
                .zip(targets)
                .map(|(f, y)| {
                    let p = sigmoid(*f).clamp(PROB_EPS, 1.0 - PROB_EPS);
                    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
                })
                .sum::<f64>()
                / n
        }
    }
}

impl GbtFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_row_staged(row, self.trees.len())
    }

    /// Prediction using only the first `rounds` trees.
    pub fn predict_row_staged(&self, row: &[f64], rounds: usize) -> f64 {
        let f = self.init
            + self.trees[..rounds]
                .iter()
                .map(|t| self.learning_rate * t.predict_row(row))
                .sum::<f64>();
        match self.task {
            Task::Regression => f,
            Task::BinaryClassification => sigmoid(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_round_unit_rate_fits_two_points_exactly() {
        let rows = vec![vec![0.0], vec![1.0]];
        let targets = vec![0.0, 1.0];
        let params = GbtParams {
            num_round: 1,
            learning_rate: 1.0,
            max_depth: 1,
            min_samples_leaf: 1,
        };
        let fit = fit(&params, &rows, &targets, Task::Regression);
        assert_eq!(fit.predict_row(&[0.0]), 0.0);
        assert_eq!(fit.predict_row(&[1.0]), 1.0);
        assert_eq!(fit.train_loss[0], 0.0);
    }

    #[test]
    fn depth_zero_predicts_target_mean() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let targets = vec![1.0, 2.0, 3.0, 6.0];
        let params = GbtParams {
            num_round: 3,
            learning_rate: 1.0,
            max_depth: 0,
            min_samples_leaf: 1,
        };
        let fit = fit(&params, &rows, &targets, Task::Regression);
        assert_eq!(fit.predict_row(&[9.0]), 3.0);
    }

    #[test]
    fn training_loss_non_increasing() {
        // Noisy quadratic target.
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 10.0]).collect();
        let targets: Vec<f64> = rows
            .iter()
            .map(|r| r[0] * r[0] + (r[0] * 13.7).sin() * 0.3)
            .collect();
        let params = GbtParams {
            num_round: 25,
            learning_rate: 0.5,
            max_depth: 2,
            min_samples_leaf: 1,
        };
        let fit = fit(&params, &rows, &targets, Task::Regression);
        for w in fit.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "loss increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn classification_scores_in_unit_interval() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let targets: Vec<f64> = (0..20).map(|i| if i < 10 { 0.0 } else { 1.0 }).collect();
        let params = GbtParams {
            num_round: 15,
            learning_rate: 0.3,
            max_depth: 2,
            min_samples_leaf: 1,
        };
        let fit = fit(&params, &rows, &targets, Task::BinaryClassification);
        for row in &rows {
            let p = fit.predict_row(row);
            assert!((0.0..=1.0).contains(&p));
        }
        assert!(fit.predict_row(&[1.0]) < 0.3);
        assert!(fit.predict_row(&[18.0]) > 0.7);
    }

    #[test]
    fn staged_prediction_matches_full() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let targets: Vec<f64> = (0..10).map(|i| (i as f64).sqrt()).collect();
        let params = GbtParams {
            num_round: 5,
            learning_rate: 0.4,
            max_depth: 2,
            min_samples_leaf: 1,
        };
        let fit = fit(&params, &rows, &targets, Task::Regression);
        for row in &rows {
            assert_eq!(fit.predict_row(row), fit.predict_row_staged(row, 5));
        }
    }
}
