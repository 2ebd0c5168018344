//! CART decision trees shared by the random forest and gradient-boosting
//! learners.
//!
//! Split search scans midpoints of sorted unique values exhaustively. Ties
//! resolve to the lowest feature index, then the lowest threshold, so a
//! fit is a pure function of (data, config, rng stream).

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitCriterion {
    /// Regression: maximize summed-squared-error reduction; leaves hold
    /// the mean target.
    VarianceReduction,
    /// Binary classification: minimize weighted Gini impurity; leaves
    /// hold the majority label (ties go to 0).
    Gini,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartConfig {
    /// 0 means the root itself is a leaf.
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Fraction of features considered per node; 1.0 scans all.
    pub feature_subsample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Branch {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartTree {
    nodes: Vec<Node>,
}

impl CartTree {
    /// Fit on the rows selected by `idx`. `rng` drives per-node feature
    /// subsampling and is only consulted when `feature_subsample < 1`.
    pub fn fit(
        rows: &[Vec<f64>],
        targets: &[f64],
        idx: &[usize],
        criterion: SplitCriterion,
        config: &CartConfig,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> CartTree {
        assert!(!idx.is_empty(), "cannot fit a tree on zero rows");
        let n_features = rows[0].len();
        let mut builder = Builder {
            rows,
            targets,
            criterion,
            config,
            n_features,
            nodes: Vec::new(),
        };
        let mut scratch = idx.to_vec();
        builder.build(&mut scratch, config.max_depth, &mut rng);
        CartTree {
            nodes: builder.nodes,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.nodes[self.leaf_index_of(row)] {
            Node::Leaf { value } => *value,
            Node::Branch { .. } => unreachable!("leaf_index_of returns a leaf"),
        }
    }

    /// Index of the leaf node a row routes to.
    pub fn leaf_index_of(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Branch {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Overwrite a leaf's value; used by boosting to install Newton steps.
    pub fn set_leaf_value(&mut self, node: usize, value: f64) {
        match &mut self.nodes[node] {
            Node::Leaf { value: v } => *v = value,
            Node::Branch { .. } => panic!("node {node} is not a leaf"),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    targets: &'a [f64],
    criterion: SplitCriterion,
    config: &'a CartConfig,
    n_features: usize,
    nodes: Vec<Node>,
}

impl<'a> Builder<'a> {
    fn build(
        &mut self,
        idx: &mut [usize],
        depth_left: usize,
        rng: &mut Option<&mut ChaCha8Rng>,
    ) -> usize {
        if depth_left == 0 || idx.len() < 2 * self.config.min_samples_leaf || idx.len() < 2 {
            return self.push_leaf(idx);
        }
        let split = match self.best_split(idx, rng) {
            Some(s) => s,
            None => return self.push_leaf(idx),
        };

        // Partition in place, preserving relative order on each side.
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][split.feature] <= split.threshold);

        let at = self.nodes.len();
        self.nodes.push(Node::Branch {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left_id = self.build(&mut left, depth_left - 1, rng);
        let right_id = self.build(&mut right, depth_left - 1, rng);
        if let Node::Branch {
            left: l, right: r, ..
        } = &mut self.nodes[at]
        {
            *l = left_id;
            *r = right_id;
        }
        at
    }

    fn push_leaf(&mut self, idx: &[usize]) -> usize {
        let value = match self.criterion {
            SplitCriterion::VarianceReduction => {
                idx.iter().map(|&i| self.targets[i]).sum::<f64>() / idx.len() as f64
            }
            SplitCriterion::Gini => {
                let ones = idx.iter().filter(|&&i| self.targets[i] >= 0.5).count();
                if 2 * ones > idx.len() {
                    1.0
                } else {
                    0.0
                }
            }
        };
        self.nodes.push(Node::Leaf { value });
        self.nodes.len() - 1
    }

    fn candidate_features(&self, rng: &mut Option<&mut ChaCha8Rng>) -> Vec<usize> {
        let d = self.n_features;
        if self.config.feature_subsample >= 1.0 {
            return (0..d).collect();
        }
        let keep = ((self.config.feature_subsample * d as f64).ceil() as usize).clamp(1, d);
        match rng {
            Some(rng) => {
                let mut all: Vec<usize> = (0..d).collect();
                all.shuffle(rng);
                let mut chosen: Vec<usize> = all.into_iter().take(keep).collect();
                chosen.sort_unstable();
                chosen
            }
            None => (0..keep).collect(),
        }
    }

    fn best_split(
        &self,
        idx: &[usize],
        rng: &mut Option<&mut ChaCha8Rng>,
    ) -> Option<Split> {
        let min_leaf = self.config.min_samples_leaf;
        let mut best: Option<Split> = None;
        for feature in self.candidate_features(rng) {
            let mut pairs: Vec<(f64, f64)> = idx
                .iter()
                .map(|&i| (self.rows[i][feature], self.targets[i]))
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

            let n = pairs.len();
            let total_sum: f64 = pairs.iter().map(|p| p.1).sum();
            let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
            let total_ones: f64 = pairs.iter().filter(|p| p.1 >= 0.5).count() as f64;

            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            let mut left_ones = 0.0;
            for i in 0..n - 1 {
                left_sum += pairs[i].1;
                left_sq += pairs[i].1 * pairs[i].1;
                if pairs[i].1 >= 0.5 {
                    left_ones += 1.0;
                }
                if pairs[i].0 == pairs[i + 1].0 {
                    continue; // not a boundary between distinct values
                }
                let nl = (i + 1) as f64;
                let nr = (n - i - 1) as f64;
                if (nl as usize) < min_leaf || (nr as usize) < min_leaf {
                    continue;
                }
                let gain = match self.criterion {
                    SplitCriterion::VarianceReduction => {
                        // SSE reduction of the split.
                        let parent = total_sq - total_sum * total_sum / n as f64;
                        let left = left_sq - left_sum * left_sum / nl;
                        let right_sum = total_sum - left_sum;
                        let right = (total_sq - left_sq) - right_sum * right_sum / nr;
                        parent - left - right
                    }
                    SplitCriterion::Gini => {
                        let gini = |ones: f64, count: f64| {
                            let p = ones / count;
                            2.0 * p * (1.0 - p)
                        };
                        let parent = n as f64 * gini(total_ones, n as f64);
                        let left = nl * gini(left_ones, nl);
                        let right = nr * gini(total_ones - left_ones, nr);
                        parent - left - right
                    }
                };
                if gain <= 1e-12 {
                    continue;
                }
                let threshold = (pairs[i].0 + pairs[i + 1].0) / 2.0;
                // Strict improvement wins; the ascending scan order makes
                // ties resolve to the lowest feature then lowest threshold.
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Split {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}
