//! Evaluation metrics: MAPE, MAE, R-squared, and classification accuracy.
//! MAPE is always a fraction, never a percentage, and rows with a zero
//! target are excluded from it (with the exclusion count reported).

use super::{LearnError, Task};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    /// Mean |(y - yhat) / y| over rows with y != 0; `None` when every
    /// target is zero.
    pub mape: Option<f64>,
    /// Rows excluded from MAPE because the target was zero.
    pub mape_excluded: usize,
    pub mae: f64,
    /// `None` when the targets are constant (SS_tot = 0).
    pub r2: Option<f64>,
    /// Fraction of rounded scores equal to the label; classification only.
    pub accuracy: Option<f64>,
}

pub fn evaluate(
    predictions: &[f64],
    targets: &[f64],
    task: Task,
) -> Result<MetricSet, LearnError> {
    if predictions.len() != targets.len() {
        return Err(LearnError::LengthMismatch {
            expected: targets.len(),
            got: predictions.len(),
        });
    }
    if targets.is_empty() {
        return Err(LearnError::LengthMismatch {
            expected: 1,
            got: 0,
        });
    }
    let n = targets.len() as f64;

    let mae = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (y - p).abs())
        .sum::<f64>()
        / n;

    let mut ape_sum = 0.0;
    let mut ape_n = 0usize;
    let mut excluded = 0usize;
    for (p, y) in predictions.iter().zip(targets) {
        if *y == 0.0 {
            excluded += 1;
        } else {
            ape_sum += ((y - p) / y).abs();
            ape_n += 1;
        }
    }
    let mape = (ape_n > 0).then(|| ape_sum / ape_n as f64);

    let mean_y = targets.iter().sum::<f64>() / n;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (y - p).powi(2))
        .sum();
    let r2 = (ss_tot > 1e-12 * n * (1.0 + mean_y * mean_y)).then(|| 1.0 - ss_res / ss_tot);

    let accuracy = match task {
        Task::BinaryClassification => Some(
            predictions
                .iter()
                .zip(targets)
                .filter(|(p, y)| p.round() == **y)
                .count() as f64
                / n,
        ),
        Task::Regression => None,
    };

    Ok(MetricSet {
        mape,
        mape_excluded: excluded,
        mae,
        r2,
        accuracy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricId {
    Accuracy,
    Mae,
    Mape,
    R2,
}

impl MetricId {
    pub fn name(self) -> &'static str {
        match self {
            MetricId::Accuracy => "accuracy",
            MetricId::Mae => "mae",
            MetricId::Mape => "mape",
            MetricId::R2 => "r2",
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, MetricId::Accuracy | MetricId::R2)
    }

    /// Metric value in its natural units.
    pub fn extract(self, metrics: &MetricSet) -> Result<f64, LearnError> {
        let v = match self {
            MetricId::Accuracy => metrics.accuracy,
            MetricId::Mae => Some(metrics.mae),
            MetricId::Mape => metrics.mape,
            MetricId::R2 => metrics.r2,
        };
        v.ok_or(LearnError::MetricUndefined(self.name()))
    }

    /// Score where larger is always better; error metrics are negated.
    pub fn oriented(self, value: f64) -> f64 {
        if self.higher_is_better() {
            value
        } else {
            -value
        }
    }
}

impl FromStr for MetricId {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "accuracy" => Ok(MetricId::Accuracy),
            "mae" => Ok(MetricId::Mae),
            "mape" => Ok(MetricId::Mape),
            "r2" => Ok(MetricId::R2),
            other => Err(LearnError::UnknownMetric(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit() {
        let y = vec![1.0, 2.0, 3.0];
        let m = evaluate(&y, &y, Task::Regression).unwrap();
        assert_eq!(m.mape, Some(0.0));
        assert_eq!(m.mae, 0.0);
        assert_eq!(m.r2, Some(1.0));
        assert_eq!(m.accuracy, None);
    }

    #[test]
    fn hand_computed_example() {
        let y = vec![100.0, 200.0];
        let p = vec![110.0, 180.0];
        let m = evaluate(&p, &y, Task::Regression).unwrap();
        assert!((m.mape.unwrap() - 0.10).abs() < 1e-12);
        assert!((m.mae - 15.0).abs() < 1e-12);
    }

    #[test]
    fn mean_prediction_gives_zero_r2() {
        let y = vec![1.0, 2.0, 3.0, 6.0];
        let p = vec![3.0; 4];
        let m = evaluate(&p, &y, Task::Regression).unwrap();
        assert!(m.r2.unwrap().abs() < 1e-12);
    }

    #[test]
    fn zero_targets_excluded_from_mape() {
        let y = vec![0.0, 2.0];
        let p = vec![1.0, 1.0];
        let m = evaluate(&p, &y, Task::Regression).unwrap();
        assert_eq!(m.mape_excluded, 1);
        assert!((m.mape.unwrap() - 0.5).abs() < 1e-12);

        let all_zero = evaluate(&p, &[0.0, 0.0], Task::Regression).unwrap();
        assert_eq!(all_zero.mape, None);
        assert_eq!(all_zero.mape_excluded, 2);
    }

    #[test]
    fn constant_targets_leave_r2_undefined() {
        let m = evaluate(&[1.0, 1.0], &[5.0, 5.0], Task::Regression).unwrap();
        assert_eq!(m.r2, None);
        assert!(matches!(
            MetricId::R2.extract(&m),
            Err(LearnError::MetricUndefined("r2"))
        ));
    }

    #[test]
    fn accuracy_rounds_scores() {
        let y = vec![0.0, 1.0, 1.0, 0.0];
        let p = vec![0.2, 0.8, 0.4, 0.6];
        let m = evaluate(&p, &y, Task::BinaryClassification).unwrap();
        assert_eq!(m.accuracy, Some(0.5));
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            evaluate(&[1.0], &[1.0, 2.0], Task::Regression),
            Err(LearnError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn metric_id_parsing_and_orientation() {
        assert_eq!(MetricId::from_str("MAE").unwrap(), MetricId::Mae);
        assert!(matches!(
            MetricId::from_str("f1"),
            Err(LearnError::UnknownMetric(_))
        ));
        assert_eq!(MetricId::Mae.oriented(3.0), -3.0);
        assert_eq!(MetricId::Accuracy.oriented(0.9), 0.9);
    }

    /// Brute-force re-implementation cross-check on random instances.
    #[test]
    fn matches_brute_force_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let n = rng.random_range(1..30);
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let p: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let m = evaluate(&p, &y, Task::Regression).unwrap();

            let mut mae = 0.0;
            for i in 0..n {
                mae += (y[i] - p[i]).abs();
            }
            mae /= n as f64;
            assert!((m.mae - mae).abs() < 1e-12);

            let mut ape = Vec::new();
            for i in 0..n {
                if y[i] != 0.0 {
                    ape.push(((y[i] - p[i]) / y[i]).abs());
                }
            }
            if !ape.is_empty() {
                let mape = ape.iter().sum::<f64>() / ape.len() as f64;
                assert!((m.mape.unwrap() - mape).abs() < 1e-12);
            }

            let mean = y.iter().sum::<f64>() / n as f64;
            let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
            let ss_res: f64 = (0..n).map(|i| (y[i] - p[i]) * (y[i] - p[i])).sum();
            if let Some(r2) = m.r2 {
                assert!((r2 - (1.0 - ss_res / ss_tot)).abs() < 1e-12);
            }
        }
    }
}
