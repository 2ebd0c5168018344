//! Pearson and Spearman correlation matrices.

use super::FeatureError;
use crate::ingest::{FeatureMatrix, Stage};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

/// Symmetric correlation matrix with unit diagonal. Zero-variance columns
/// correlate 0 with everything by convention and are listed in
/// `zero_variance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub method: CorrelationMethod,
    pub zero_variance: Vec<String>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("column");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (i, n) in self.names.iter().enumerate() {
            out.push_str(n);
            for v in &self.values[i] {
                out.push_str(&format!(",{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn correlation_matrix(
    fm: &FeatureMatrix,
    method: CorrelationMethod,
) -> Result<CorrelationMatrix, FeatureError> {
    if fm.stage() < Stage::Encoded {
        return Err(FeatureError::WrongStage {
            expected: "ENCODED or later",
            got: fm.stage().name(),
        });
    }
    if fm.rows() < 2 {
        return Err(FeatureError::DegenerateInput(fm.rows()));
    }

    let d = fm.n_columns();
    let data: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let col = fm.column_at(j).1;
            match method {
                CorrelationMethod::Pearson => col.to_vec(),
                CorrelationMethod::Spearman => average_ranks(col),
            }
        })
        .collect();

    let n = fm.rows() as f64;
    let means: Vec<f64> = data.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let stds: Vec<f64> = data
        .iter()
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
        .collect();

    let degenerate: Vec<bool> = stds
        .iter()
        .zip(&means)
        .map(|(s, m)| *s <= 1e-12 * (1.0 + m.abs()))
        .collect();

    let mut values = vec![vec![0.0; d]; d];
    for i in 0..d {
        values[i][i] = 1.0;
        for j in (i + 1)..d {
            let r = if degenerate[i] || degenerate[j] {
                0.0
            } else {
                let cov: f64 = data[i]
                    .iter()
                    .zip(&data[j])
                    .map(|(a, b)| (a - means[i]) * (b - means[j]))
                    .sum::<f64>()
                    / n;
                (cov / (stds[i] * stds[j])).clamp(-1.0, 1.0)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }

    let names: Vec<String> = fm.column_names().iter().map(|s| s.to_string()).collect();
    let zero_variance = names
        .iter()
        .zip(&degenerate)
        .filter(|(_, &z)| z)
        .map(|(n, _)| n.clone())
        .collect();
    Ok(CorrelationMatrix {
        names,
        values,
        method,
        zero_variance,
    })
}

/// 1-based ranks with ties averaged.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share the average
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}
