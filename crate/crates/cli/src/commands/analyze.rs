//! `mlab analyze`: runs tests per match (momentum and turning points for
//! both players) and the aggregate significance table.

use crate::bundle::DatasetBundle;
use crate::commands::MomentumArgs;
use crate::io::write_atomic;
use anyhow::{bail, Result};
use mlab_core::signals::{aggregate, analyze_match, BinarizeRule, MatchAnalysis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub dataset: PathBuf,
    /// Restrict to one match; `None` analyzes all.
    pub match_id: Option<String>,
    pub momentum: MomentumArgs,
    /// "above-median" or "positive-delta".
    pub rule: String,
    pub out_dir: PathBuf,
}

pub fn parse_rule(text: &str) -> Result<BinarizeRule> {
    match text {
        "above-median" => Ok(BinarizeRule::AboveMedian),
        "positive-delta" => Ok(BinarizeRule::PositiveDelta),
        other => bail!("unknown binarize rule `{other}` (expected above-median or positive-delta)"),
    }
}

pub fn run(cfg: &AnalyzeConfig) -> Result<Vec<PathBuf>> {
    let bundle = DatasetBundle::load(&cfg.dataset)?;
    let rule = parse_rule(&cfg.rule)?;
    let momentum_cfg = cfg.momentum.to_config();

    let selected: Vec<(&String, &Vec<mlab_core::PointRecord>)> = match &cfg.match_id {
        Some(id) => match bundle.dataset.matches.get_key_value(id) {
            Some((k, v)) => vec![(k, v)],
            None => bail!("match `{id}` not found in dataset"),
        },
        None => bundle.dataset.matches.iter().collect(),
    };
    if selected.is_empty() {
        bail!("dataset has no matches");
    }

    let analyses: Vec<MatchAnalysis> = selected
        .par_iter()
        .map(|(_, points)| analyze_match(points, &momentum_cfg, rule))
        .collect::<Result<_, _>>()?;

    let mut outputs = Vec::new();
    for analysis in &analyses {
        let path = cfg
            .out_dir
            .join(format!("runs_tests_{}.csv", sanitize(&analysis.match_id)));
        write_atomic(&path, &analysis.to_csv())?;
        outputs.push(path);
    }
    let report = aggregate(&analyses);
    let aggregate_path = cfg.out_dir.join("aggregate.csv");
    write_atomic(&aggregate_path, &report.to_csv())?;
    // The aggregate is the primary output; list it first so the manifest
    // lands beside it.
    outputs.insert(0, aggregate_path);
    Ok(outputs)
}

/// Keep match ids filesystem-safe.
fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
