//! Train/test splitting, k-fold cross-validation, and boosting-round
//! search.

use super::{train, LearnError, LearnerSpec, MetricId, ModelParams, Task};
use crate::ingest::FeatureMatrix;
use crate::learners::evaluate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A deterministic random row partition. Indices are sorted within each
/// side so row order stays stable.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTestSplit {
    pub train_x: FeatureMatrix,
    pub train_y: Vec<f64>,
    pub test_x: FeatureMatrix,
    pub test_y: Vec<f64>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

pub fn split_train_test(
    fm: &FeatureMatrix,
    target: &[f64],
    ratio: f64,
    seed: u64,
) -> Result<TrainTestSplit, LearnError> {
    let n = fm.rows();
    if target.len() != n {
        return Err(LearnError::LengthMismatch {
            expected: n,
            got: target.len(),
        });
    }
    if n < 2 {
        return Err(LearnError::TooFewRows { rows: n, needed: 2 });
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(LearnError::InvalidSpec(format!(
            "split ratio must be in (0, 1), got {ratio}"
        )));
    }
    // Slack absorbs float dust so e.g. 10 * 0.7 lands on 7 exactly.
    let n_train = ((n as f64 * ratio) + 1e-9).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(LearnError::TooFewRows { rows: n, needed: 2 });
    }

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let mut train_indices = indices[..n_train].to_vec();
    let mut test_indices = indices[n_train..].to_vec();
    train_indices.sort_unstable();
    test_indices.sort_unstable();

    Ok(TrainTestSplit {
        train_x: fm.select_rows(&train_indices),
        train_y: train_indices.iter().map(|&i| target[i]).collect(),
        test_x: fm.select_rows(&test_indices),
        test_y: test_indices.iter().map(|&i| target[i]).collect(),
        train_indices,
        test_indices,
    })
}

/// Shuffle `0..n` once and cut it into k folds whose sizes differ by at
/// most one (the first `n % k` folds take the extra row). Indices are
/// sorted within each fold.
pub fn kfold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, LearnError> {
    if k < 2 {
        return Err(LearnError::InvalidSpec(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if n < k {
        return Err(LearnError::TooFewRows { rows: n, needed: k });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold: Vec<usize> = indices[at..at + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        at += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Metric per held-out fold, in fold order and natural units.
    pub fold_scores: Vec<f64>,
    pub mean: f64,
    pub seed: u64,
}

pub fn kfold_cv(
    spec: &LearnerSpec,
    fm: &FeatureMatrix,
    target: &[f64],
    task: Task,
    k: usize,
    metric: MetricId,
    seed: u64,
) -> Result<CvResult, LearnError> {
    if target.len() != fm.rows() {
        return Err(LearnError::LengthMismatch {
            expected: fm.rows(),
            got: target.len(),
        });
    }
    let folds = kfold_partition(fm.rows(), k, seed)?;
    let mut fold_scores = Vec::with_capacity(k);
    for held_out in &folds {
        let train_idx: Vec<usize> = folds
            .iter()
            .filter(|f| !std::ptr::eq(*f, held_out))
            .flatten()
            .copied()
            .collect();
        let mut train_idx = train_idx;
        train_idx.sort_unstable();

        let train_y: Vec<f64> = train_idx.iter().map(|&i| target[i]).collect();
        let model = train(spec, &fm.select_rows(&train_idx), &train_y, task)?;
        let test_y: Vec<f64> = held_out.iter().map(|&i| target[i]).collect();
        let predictions = model.predict(&fm.select_rows(held_out))?;
        let metrics = evaluate(&predictions, &test_y, task)?;
        fold_scores.push(metric.extract(&metrics)?);
    }
    let mean = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    Ok(CvResult {
        fold_scores,
        mean,
        seed,
    })
}

/// Evaluate each boosting-round candidate by cross-validation and pick
/// the best mean score (error metrics compare negated, so larger is
/// always better). Ties go to the smaller candidate.
#[allow(clippy::too_many_arguments)]
pub fn tune_rounds(
    spec: &LearnerSpec,
    fm: &FeatureMatrix,
    target: &[f64],
    task: Task,
    candidates: &[usize],
    k: usize,
    metric: MetricId,
    seed: u64,
) -> Result<(usize, Vec<(usize, CvResult)>), LearnError> {
    let base = match &spec.params {
        ModelParams::Gbt(p) => *p,
        other => {
            return Err(LearnError::InvalidSpec(format!(
                "tune_rounds requires a GBT spec, got {}",
                other.kind().name()
            )))
        }
    };
    if candidates.is_empty() {
        return Err(LearnError::InvalidSpec(
            "tune_rounds needs at least one candidate".to_string(),
        ));
    }

    let mut results = Vec::with_capacity(candidates.len());
    for &num_round in candidates {
        let mut params = base;
        params.num_round = num_round;
        let candidate_spec = LearnerSpec {
            params: ModelParams::Gbt(params),
            seed: spec.seed,
        };
        let cv = kfold_cv(&candidate_spec, fm, target, task, k, metric, seed)?;
        results.push((num_round, cv));
    }

    let mut best = results[0].0;
    let mut best_score = metric.oriented(results[0].1.mean);
    for (num_round, cv) in &results[1..] {
        let score = metric.oriented(cv.mean);
        let wins = score > best_score || (score == best_score && *num_round < best);
        if wins {
            best = *num_round;
            best_score = score;
        }
    }
    Ok((best, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Stage;

    fn matrix(n: usize) -> FeatureMatrix {
        FeatureMatrix::from_columns(
            vec![("x".to_string(), (0..n).map(|i| i as f64).collect())],
            Stage::Standardized,
        )
        .unwrap()
    }

    #[test]
    fn seventy_thirty_split() {
        let fm = matrix(10);
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let s = split_train_test(&fm, &y, 0.7, 1).unwrap();
        assert_eq!(s.train_x.rows(), 7);
        assert_eq!(s.test_x.rows(), 3);
        let mut all: Vec<usize> = s
            .train_indices
            .iter()
            .chain(&s.test_indices)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn split_deterministic_per_seed() {
        let fm = matrix(20);
        let y = vec![0.0; 20];
        let a = split_train_test(&fm, &y, 0.7, 9).unwrap();
        let b = split_train_test(&fm, &y, 0.7, 9).unwrap();
        assert_eq!(a.train_indices, b.train_indices);
        let c = split_train_test(&fm, &y, 0.7, 10).unwrap();
        assert_ne!(a.train_indices, c.train_indices);
    }

    #[test]
    fn minimal_two_row_split() {
        let fm = matrix(2);
        let y = vec![0.0, 1.0];
        let s = split_train_test(&fm, &y, 0.5, 0).unwrap();
        assert_eq!(s.train_x.rows(), 1);
        assert_eq!(s.test_x.rows(), 1);
    }

    #[test]
    fn too_few_rows() {
        let fm = matrix(1);
        assert!(matches!(
            split_train_test(&fm, &[0.0], 0.5, 0),
            Err(LearnError::TooFewRows { .. })
        ));
    }

    #[test]
    fn fold_sizes_balanced() {
        let folds = kfold_partition(23, 10, 5).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 2, 2, 2, 3, 3, 3]);

        let mut all: Vec<usize> = folds.into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
    }

    #[test]
    fn leave_one_out() {
        let folds = kfold_partition(4, 4, 1).unwrap();
        assert_eq!(folds.len(), 4);
        assert!(folds.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn constant_labels_give_unit_accuracy() {
        let fm = matrix(12);
        let y = vec![1.0; 12];
        let spec = LearnerSpec::random_forest_default(3).with_seed(1);
        let cv = kfold_cv(
            &spec,
            &fm,
            &y,
            Task::BinaryClassification,
            4,
            MetricId::Accuracy,
            2,
        )
        .unwrap();
        assert!(cv.fold_scores.iter().all(|&s| s == 1.0));
        assert_eq!(cv.mean, 1.0);
    }

    #[test]
    fn tune_prefers_more_rounds_on_noiseless_target() {
        let n = 40;
        let fm = FeatureMatrix::from_columns(
            vec![(
                "x".to_string(),
                (0..n).map(|i| i as f64 / n as f64).collect(),
            )],
            Stage::Standardized,
        )
        .unwrap();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                (6.0 * x).sin() + x * x
            })
            .collect();
        let spec = LearnerSpec::gbt_with(20, 0.3, 2).with_seed(0);
        let (best, results) = tune_rounds(
            &spec,
            &fm,
            &y,
            Task::Regression,
            &[1, 200],
            4,
            MetricId::Mae,
            3,
        )
        .unwrap();
        assert_eq!(best, 200);
        assert_eq!(results.len(), 2);
    }

    #[test]
    fn tune_tie_breaks_to_smaller() {
        // Constant target: every candidate scores identically.
        let fm = matrix(8);
        let y = vec![2.0; 8];
        let spec = LearnerSpec::gbt_with(5, 1.0, 2).with_seed(0);
        let (best, _) = tune_rounds(
            &spec,
            &fm,
            &y,
            Task::Regression,
            &[9, 3, 6],
            4,
            MetricId::Mae,
            1,
        )
        .unwrap();
        assert_eq!(best, 3);
    }

    #[test]
    fn tune_single_candidate() {
        let fm = matrix(8);
        let y: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let spec = LearnerSpec::gbt_with(2, 1.0, 2).with_seed(0);
        let (best, _) = tune_rounds(
            &spec,
            &fm,
            &y,
            Task::Regression,
            &[7],
            4,
            MetricId::Mae,
            1,
        )
        .unwrap();
        assert_eq!(best, 7);
    }

    #[test]
    fn tune_rejects_non_gbt_spec() {
        let fm = matrix(8);
        let y = vec![0.0; 8];
        let spec = LearnerSpec::logistic_default().with_seed(0);
        assert!(matches!(
            tune_rounds(
                &spec,
                &fm,
                &y,
                Task::BinaryClassification,
                &[1],
                4,
                MetricId::Accuracy,
                1
            ),
            Err(LearnError::InvalidSpec(_))
        ));
    }
}
