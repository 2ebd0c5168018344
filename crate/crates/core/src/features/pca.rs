//! Principal component analysis on the population covariance matrix.
//!
//! Eigendecomposition uses cyclic Jacobi rotations; the matrices here are
//! small (tens of columns), where Jacobi's robustness and symmetry
//! guarantees matter more than speed. Component signs are normalized so
//! the entry of largest magnitude is non-negative, which keeps outputs
//! identical across runs and platforms.

use super::FeatureError;
use crate::ingest::{FeatureMatrix, Stage};
use serde::{Deserialize, Serialize};

/// Fitted PCA basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Per-column means of the training data.
    pub mean: Vec<f64>,
    /// Orthonormal principal axes, sorted by descending eigenvalue.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalue share of the total variance, one entry per component.
    pub explained_ratio: Vec<f64>,
    /// Smallest k whose cumulative explained ratio reaches the retention
    /// threshold.
    pub retained_k: usize,
    /// Training column names, required to match at transform time.
    pub column_names: Vec<String>,
}

impl PcaModel {
    /// Project one centered row onto the first `k` components.
    pub fn project(&self, row: &[f64], k: usize) -> Vec<f64> {
        let centered: Vec<f64> = row.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        self.components[..k]
            .iter()
            .map(|comp| comp.iter().zip(&centered).map(|(c, x)| c * x).sum())
            .collect()
    }

    /// Scores on every component, not just the retained ones.
    pub fn project_full(&self, row: &[f64]) -> Vec<f64> {
        self.project(row, self.components.len())
    }

    /// Map full-component scores back to the original space.
    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        let d = self.mean.len();
        let mut out = self.mean.clone();
        for (score, comp) in scores.iter().zip(&self.components) {
            for i in 0..d {
                out[i] += score * comp[i];
            }
        }
        out
    }

    pub fn cumulative_ratio(&self) -> Vec<f64> {
        let mut cum = 0.0;
        self.explained_ratio
            .iter()
            .map(|r| {
                cum += r;
                cum
            })
            .collect()
    }
}

/// Smallest k with cumulative ratio >= retention (tiny slack for float
/// accumulation).
pub(crate) fn retained_count(explained_ratio: &[f64], retention: f64) -> usize {
    let mut cum = 0.0;
    for (i, r) in explained_ratio.iter().enumerate() {
        cum += r;
        if cum + 1e-9 >= retention {
            return i + 1;
        }
    }
    explained_ratio.len()
}

/// Fit PCA on a standardized matrix, keeping components until the
/// cumulative explained-variance ratio reaches `retention`.
pub fn pca_fit(fm: &FeatureMatrix, retention: f64) -> Result<PcaModel, FeatureError> {
    if fm.stage() != Stage::Standardized {
        return Err(FeatureError::WrongStage {
            expected: Stage::Standardized.name(),
            got: fm.stage().name(),
        });
    }
    if fm.rows() < 2 {
        return Err(FeatureError::DegenerateInput(fm.rows()));
    }
    if !(retention > 0.0 && retention <= 1.0) {
        return Err(FeatureError::InvalidRetention(retention));
    }

    let n = fm.rows();
    let d = fm.n_columns();
    let cols: Vec<&[f64]> = (0..d).map(|j| fm.column_at(j).1).collect();
    let mean: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();

    // Population covariance.
    let mut cov = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let s: f64 = cols[i]
                .iter()
                .zip(cols[j])
                .map(|(a, b)| (a - mean[i]) * (b - mean[j]))
                .sum();
            let c = s / n as f64;
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }

    let (mut eigenvalues, mut components) = jacobi_eigen(&cov);
    for ev in &mut eigenvalues {
        if *ev < 0.0 {
            *ev = 0.0; // float dust on rank-deficient inputs
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).unwrap());
    eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
    components = order.iter().map(|&i| components[i].clone()).collect();

    for comp in &mut components {
        normalize_sign(comp);
    }

    let trace: f64 = eigenvalues.iter().sum();
    let explained_ratio: Vec<f64> = if trace <= f64::MIN_POSITIVE {
        // All-constant input: the first axis vacuously carries everything.
        let mut r = vec![0.0; d];
        if d > 0 {
            r[0] = 1.0;
        }
        r
    } else {
        eigenvalues.iter().map(|ev| ev / trace).collect()
    };
    let retained_k = retained_count(&explained_ratio, retention);

    Ok(PcaModel {
        mean,
        components,
        explained_ratio,
        retained_k,
        column_names: fm.column_names().iter().map(|s| s.to_string()).collect(),
    })
}

/// Project rows onto the retained components; output columns are named
/// `pc1..pck`.
pub fn pca_transform(
    model: &PcaModel,
    fm: &FeatureMatrix,
) -> Result<FeatureMatrix, FeatureError> {
    let names: Vec<String> = fm.column_names().iter().map(|s| s.to_string()).collect();
    if names != model.column_names {
        return Err(FeatureError::ColumnMismatch(format!(
            "model was fitted on {:?}, got {:?}",
            model.column_names, names
        )));
    }
    let k = model.retained_k;
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(fm.rows()); k];
    for r in 0..fm.rows() {
        let scores = model.project(&fm.row(r), k);
        for (j, s) in scores.into_iter().enumerate() {
            out[j].push(s);
        }
    }
    let columns: Vec<(String, Vec<f64>)> = out
        .into_iter()
        .enumerate()
        .map(|(j, values)| (format!("pc{}", j + 1), values))
        .collect();
    Ok(FeatureMatrix::new(
        columns,
        Stage::Reduced,
        fm.row_keys().to_vec(),
    )?)
}

impl From<crate::ingest::IngestError> for FeatureError {
    fn from(e: crate::ingest::IngestError) -> Self {
        FeatureError::InvalidPlan(e.to_string())
    }
}

/// Named groups of columns to collapse, each onto its own first principal
/// component.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroupPlan {
    pub groups: Vec<(String, Vec<String>)>,
}

impl FeatureGroupPlan {
    pub fn new(groups: Vec<(&str, Vec<&str>)>) -> FeatureGroupPlan {
        FeatureGroupPlan {
            groups: groups
                .into_iter()
                .map(|(name, members)| {
                    (
                        name.to_string(),
                        members.into_iter().map(str::to_string).collect(),
                    )
                })
                .collect(),
        }
    }

    fn validate(&self, fm: &FeatureMatrix) -> Result<(), FeatureError> {
        let mut seen = std::collections::HashSet::new();
        for (new_name, members) in &self.groups {
            if members.is_empty() {
                return Err(FeatureError::InvalidPlan(format!(
                    "group `{new_name}` has no members"
                )));
            }
            for m in members {
                if fm.column(m).is_none() {
                    return Err(FeatureError::UnknownColumn(m.clone()));
                }
                if !seen.insert(m.clone()) {
                    return Err(FeatureError::InvalidPlan(format!(
                        "column `{m}` appears in more than one group"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Replace each planned group by the group's own first principal
/// component (placed where the group's first member was); all other
/// columns pass through unchanged. Each group maps to exactly one output
/// column, so the retention threshold does not apply here.
pub fn fuse_groups(
    fm: &FeatureMatrix,
    plan: &FeatureGroupPlan,
) -> Result<FeatureMatrix, FeatureError> {
    plan.validate(fm)?;
    if fm.rows() < 2 && !plan.groups.is_empty() {
        return Err(FeatureError::DegenerateInput(fm.rows()));
    }

    let mut fused: Vec<(String, Vec<f64>)> = Vec::with_capacity(plan.groups.len());
    for (new_name, members) in &plan.groups {
        let cols: Vec<&[f64]> = members.iter().map(|m| fm.column(m).unwrap()).collect();
        fused.push((new_name.clone(), first_component_scores(&cols)));
    }

    let member_of: std::collections::HashMap<&str, usize> = plan
        .groups
        .iter()
        .enumerate()
        .flat_map(|(gi, (_, members))| members.iter().map(move |m| (m.as_str(), gi)))
        .collect();

    let mut emitted = vec![false; plan.groups.len()];
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for (name, values) in fm.columns() {
        match member_of.get(name) {
            Some(&gi) => {
                if !emitted[gi] {
                    emitted[gi] = true;
                    columns.push(fused[gi].clone());
                }
            }
            None => columns.push((name.to_string(), values.to_vec())),
        }
    }
    Ok(fm.replace_columns(columns, fm.stage())?)
}

/// First-principal-component scores of a centered column group.
fn first_component_scores(cols: &[&[f64]]) -> Vec<f64> {
    let n = cols[0].len();
    let d = cols.len();
    let mean: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let s: f64 = cols[i]
                .iter()
                .zip(cols[j])
                .map(|(a, b)| (a - mean[i]) * (b - mean[j]))
                .sum();
            cov[i][j] = s / n as f64;
            cov[j][i] = cov[i][j];
        }
    }
    let (eigenvalues, mut components) = jacobi_eigen(&cov);
    let best = (0..d)
        .max_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).unwrap())
        .unwrap();
    let axis = &mut components[best];
    normalize_sign(axis);
    (0..n)
        .map(|r| {
            (0..d)
                .map(|i| (cols[i][r] - mean[i]) * axis[i])
                .sum::<f64>()
        })
        .collect()
}

/// Flip a vector so its entry of largest magnitude is non-negative.
fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Eigenvalues and eigenvectors of a symmetric matrix via cyclic Jacobi
/// rotations. Returns `(eigenvalues, eigenvectors)` where
/// `eigenvectors[i]` pairs with `eigenvalues[i]`, unsorted.
#[allow(clippy::needless_range_loop)] // rotations touch two columns per row
pub(crate) fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    if d == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let frob: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let tol = 1e-10 * frob.max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(m[p][q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                if m[p][q].abs() <= tol / d as f64 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for i in 0..d {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for i in 0..d {
                    let mpi = m[p][i];
                    let mqi = m[q][i];
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..d).map(|i| m[i][i]).collect();
    let eigenvectors: Vec<Vec<f64>> = (0..d)
        .map(|j| (0..d).map(|i| v[i][j]).collect())
        .collect();
    (eigenvalues, eigenvectors)
}
