//! `mlab montecarlo`: repeated random-split robustness runs with a JSON
//! report, a samples CSV, and a density chart.

use crate::bundle::DatasetBundle;
use crate::io::write_atomic;
use crate::labels::{build_labeled_features, LabelSpec};
use crate::recipe::parse_recipe;
use crate::svg::density_chart;
use anyhow::Result;
use mlab_core::learners::{MetricId, Task};
use mlab_core::seed::derive_seed;
use mlab_core::simlab::monte_carlo;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub dataset: PathBuf,
    /// Model recipe, e.g. `gbt:num_round=20` or `weighted:k=5`.
    pub model: String,
    pub label: String,
    pub metric: String,
    pub n: usize,
    pub ratio: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub svg: Option<PathBuf>,
}

fn samples_csv_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "mc".to_string());
    out.with_file_name(format!("{stem}.samples.csv"))
}

pub fn run(cfg: &MonteCarloConfig) -> Result<Vec<PathBuf>> {
    let bundle = DatasetBundle::load(&cfg.dataset)?;
    let (features, labels) = build_labeled_features(&bundle, &LabelSpec(cfg.label.clone()))?;
    let recipe = parse_recipe(&cfg.model, derive_seed(cfg.seed, 100))?;
    let metric = MetricId::from_str(&cfg.metric)?;

    let report = monte_carlo(
        &recipe,
        &features,
        &labels,
        Task::BinaryClassification,
        cfg.n,
        cfg.ratio,
        metric,
        cfg.seed,
    )?;

    write_atomic(&cfg.out, &report.to_json())?;
    let csv_path = samples_csv_path(&cfg.out);
    write_atomic(&csv_path, &report.samples_csv())?;
    let mut outputs = vec![cfg.out.clone(), csv_path];

    if let Some(svg_path) = &cfg.svg {
        let chart = density_chart(
            &format!(
                "Monte Carlo {} density - {}",
                metric.name(),
                report.model_id
            ),
            metric.name(),
            &report.histogram,
            report.density.as_ref(),
        );
        write_atomic(svg_path, &chart)?;
        outputs.push(svg_path.clone());
    }
    Ok(outputs)
}
