//! Margin-based linear learners: hinge-loss SVM trained by full-batch
//! subgradient descent, and L2-regularized logistic regression trained by
//! full-batch gradient descent. Both are deterministic; no sampling.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Hinge-loss weight; regularization is 1/(c * n).
    pub c: f64,
    pub epochs: usize,
    /// Step-size scale; epoch t uses eta0 / (1 + t).
    pub eta0: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            epochs: 200,
            eta0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2_penalty: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2_penalty: 1e-4,
            epochs: 500,
            learning_rate: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub weights: Vec<f64>,
    pub bias: f64,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LinearFit {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(row)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias
    }

    /// Probability-like score: the margin squashed through the logistic.
    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }
}

/// Hinge loss + L2, full-batch subgradient descent. Labels in {0, 1} are
/// mapped to -1/+1 internally; the bias is not regularized.
pub fn fit_svm(params: &SvmParams, rows: &[Vec<f64>], targets: &[f64]) -> LinearFit {
    let n = rows.len();
    let d = rows[0].len();
    let lambda = 1.0 / (params.c * n as f64);
    let signs: Vec<f64> = targets.iter().map(|y| 2.0 * y - 1.0).collect();

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for t in 0..params.epochs {
        let mut grad_w = vec![0.0; d];
        let mut grad_b = 0.0;
        for (row, &s) in rows.iter().zip(&signs) {
            let margin = w.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + b;
            if s * margin < 1.0 {
                for (g, x) in grad_w.iter_mut().zip(row) {
                    *g -= s * x;
                }
                grad_b -= s;
            }
        }
        let eta = params.eta0 / (1.0 + t as f64);
        let inv_n = 1.0 / n as f64;
        for (wi, g) in w.iter_mut().zip(&grad_w) {
            *wi -= eta * (lambda * *wi + g * inv_n);
        }
        b -= eta * grad_b * inv_n;
    }
    LinearFit { weights: w, bias: b }
}

/// L2-regularized maximum likelihood via full-batch gradient descent.
pub fn fit_logistic(params: &LogisticParams, rows: &[Vec<f64>], targets: &[f64]) -> LinearFit {
    let n = rows.len();
    let d = rows[0].len();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let inv_n = 1.0 / n as f64;
    for _ in 0..params.epochs {
        let mut grad_w = vec![0.0; d];
        let mut grad_b = 0.0;
        for (row, &y) in rows.iter().zip(targets) {
            let p = sigmoid(w.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + b);
            let delta = p - y;
            for (g, x) in grad_w.iter_mut().zip(row) {
                *g += delta * x;
            }
            grad_b += delta;
        }
        for (wi, g) in w.iter_mut().zip(&grad_w) {
            *wi -= params.learning_rate * (g * inv_n + params.l2_penalty * *wi);
        }
        b -= params.learning_rate * grad_b * inv_n;
    }
    LinearFit { weights: w, bias: b }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svm_separates_two_points() {
        let rows = vec![vec![-1.0], vec![1.0]];
        let targets = vec![0.0, 1.0];
        let params = SvmParams {
            c: 1e6,
            ..SvmParams::default()
        };
        let fit = fit_svm(&params, &rows, &targets);
        assert!(fit.score(&[-1.0]) < 0.5);
        assert!(fit.score(&[1.0]) > 0.5);
    }

    #[test]
    fn logistic_learns_threshold() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 - 10.0]).collect();
        let targets: Vec<f64> = (0..20).map(|i| if i < 10 { 0.0 } else { 1.0 }).collect();
        let fit = fit_logistic(&LogisticParams::default(), &rows, &targets);
        assert!(fit.score(&[-8.0]) < 0.2);
        assert!(fit.score(&[8.0]) > 0.8);
    }

    #[test]
    fn fits_are_deterministic() {
        let rows: Vec<Vec<f64>> = (0..15)
            .map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()])
            .collect();
        let targets: Vec<f64> = (0..15).map(|i| (i % 2) as f64).collect();
        let a = fit_svm(&SvmParams::default(), &rows, &targets);
        let b = fit_svm(&SvmParams::default(), &rows, &targets);
        assert_eq!(a, b);
        let c = fit_logistic(&LogisticParams::default(), &rows, &targets);
        let d = fit_logistic(&LogisticParams::default(), &rows, &targets);
        assert_eq!(c, d);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
    }
}
