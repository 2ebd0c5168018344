//! `mlab train`: fit the three base learners and the fusion on a
//! random train/test split; write the fusion model and a metrics table.

use crate::bundle::DatasetBundle;
use crate::io::write_atomic;
use crate::labels::{build_labeled_features, LabelSpec};
use anyhow::{bail, Result};
use mlab_core::fusion::{fit_stacking, fit_weighted, FusionModel};
use mlab_core::learners::{
    evaluate, split_train_test, ForestParams, GbtParams, LearnerSpec, MetricSet, ModelParams,
    Task,
};
use mlab_core::seed::derive_seed;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dataset: PathBuf,
    /// "weighted" or "stacking".
    pub mode: String,
    /// Label source: a binary column name or "next-point-victor".
    pub label: String,
    pub seed: u64,
    pub ratio: f64,
    pub k: usize,
    pub num_round: usize,
    pub n_trees: usize,
    pub model_out: PathBuf,
    pub metrics_out: PathBuf,
}

pub fn base_specs(seed: u64, num_round: usize, n_trees: usize) -> Vec<LearnerSpec> {
    vec![
        LearnerSpec::svm_default().with_seed(derive_seed(seed, 1)),
        LearnerSpec {
            params: ModelParams::RandomForest(ForestParams {
                n_trees,
                ..ForestParams::default()
            }),
            seed: derive_seed(seed, 2),
        },
        LearnerSpec {
            params: ModelParams::Gbt(GbtParams {
                num_round,
                ..GbtParams::default()
            }),
            seed: derive_seed(seed, 3),
        },
    ]
}

fn metrics_row(name: &str, split: &str, m: &MetricSet) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "NA".into());
    format!(
        "{name},{split},{},{},{},{:.6},{}\n",
        opt(m.accuracy),
        opt(m.mape),
        m.mape_excluded,
        m.mae,
        opt(m.r2)
    )
}

pub fn run(cfg: &TrainConfig) -> Result<Vec<PathBuf>> {
    let bundle = DatasetBundle::load(&cfg.dataset)?;
    let (features, labels) = build_labeled_features(&bundle, &LabelSpec(cfg.label.clone()))?;
    let split = split_train_test(&features, &labels, cfg.ratio, derive_seed(cfg.seed, 0))?;

    let specs = base_specs(cfg.seed, cfg.num_round, cfg.n_trees);
    let fusion: FusionModel = match cfg.mode.as_str() {
        "weighted" => fit_weighted(&specs, &split.train_x, &split.train_y, cfg.k, cfg.seed)?,
        "stacking" => fit_stacking(&specs, &split.train_x, &split.train_y, cfg.k, cfg.seed)?,
        other => bail!("unknown fusion mode `{other}` (expected weighted or stacking)"),
    };

    let mut csv = String::from("model,split,accuracy,mape,mape_excluded,mae,r2\n");
    let task = Task::BinaryClassification;
    for model in &fusion.base {
        let name = model.spec.kind().name();
        let train_m = evaluate(&model.predict(&split.train_x)?, &split.train_y, task)?;
        let test_m = evaluate(&model.predict(&split.test_x)?, &split.test_y, task)?;
        csv.push_str(&metrics_row(name, "train", &train_m));
        csv.push_str(&metrics_row(name, "test", &test_m));
    }
    let fused_name = format!("fusion_{}", cfg.mode);
    let train_m = evaluate(&fusion.predict(&split.train_x)?, &split.train_y, task)?;
    let test_m = evaluate(&fusion.predict(&split.test_x)?, &split.test_y, task)?;
    csv.push_str(&metrics_row(&fused_name, "train", &train_m));
    csv.push_str(&metrics_row(&fused_name, "test", &test_m));

    write_atomic(&cfg.model_out, &fusion.to_json())?;
    write_atomic(&cfg.metrics_out, &csv)?;
    Ok(vec![cfg.model_out.clone(), cfg.metrics_out.clone()])
}
