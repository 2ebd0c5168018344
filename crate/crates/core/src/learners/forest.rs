//! Random forest of bootstrap-sampled CART trees.

use super::tree::{CartConfig, CartTree, SplitCriterion};
use super::Task;
use crate::seed::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Fraction of features considered per node.
    pub feature_subsample: f64,
    /// Draw each tree's training set with replacement.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 8,
            min_samples_leaf: 1,
            feature_subsample: 1.0,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestFit {
    pub trees: Vec<CartTree>,
    pub task: Task,
}

/// Each tree draws from its own counter-derived seed, so the fit is
/// identical whether trees are built in parallel or sequentially.
pub fn fit(
    params: &ForestParams,
    rows: &[Vec<f64>],
    targets: &[f64],
    task: Task,
    seed: u64,
) -> ForestFit {
    let criterion = match task {
        Task::BinaryClassification => SplitCriterion::Gini,
        Task::Regression => SplitCriterion::VarianceReduction,
    };
    let config = CartConfig {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        feature_subsample: params.feature_subsample,
    };
    let n = rows.len();
    let trees: Vec<CartTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            let idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let needs_rng = params.feature_subsample < 1.0;
            CartTree::fit(
                rows,
                targets,
                &idx,
                criterion,
                &config,
                needs_rng.then_some(&mut rng),
            )
        })
        .collect();
    ForestFit { trees, task }
}

impl ForestFit {
    /// Classification: fraction of trees voting 1. Regression: mean of
    /// tree means.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let targets: Vec<f64> = (0..20).map(|i| if i < 10 { 0.0 } else { 1.0 }).collect();
        (rows, targets)
    }

    #[test]
    fn single_tree_no_bootstrap_equals_cart() {
        let (rows, targets) = step_data();
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            ..ForestParams::default()
        };
        let forest = fit(&params, &rows, &targets, Task::BinaryClassification, 7);
        let config = CartConfig {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            feature_subsample: 1.0,
        };
        let idx: Vec<usize> = (0..rows.len()).collect();
        let tree = CartTree::fit(&rows, &targets, &idx, SplitCriterion::Gini, &config, None);
        for row in &rows {
            assert_eq!(forest.predict_row(row), tree.predict_row(row));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let (rows, targets) = step_data();
        let params = ForestParams {
            n_trees: 12,
            feature_subsample: 1.0,
            ..ForestParams::default()
        };
        let a = fit(&params, &rows, &targets, Task::BinaryClassification, 3);
        let b = fit(&params, &rows, &targets, Task::BinaryClassification, 3);
        assert_eq!(a, b);
        let c = fit(&params, &rows, &targets, Task::BinaryClassification, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn learns_step_function() {
        let (rows, targets) = step_data();
        let forest = fit(
            &ForestParams {
                n_trees: 30,
                ..ForestParams::default()
            },
            &rows,
            &targets,
            Task::BinaryClassification,
            11,
        );
        assert!(forest.predict_row(&[2.0]) < 0.5);
        assert!(forest.predict_row(&[17.0]) > 0.5);
    }
}
