//! `mlab momentum`: per-match momentum CSV plus line, stacked-area, and
//! CUSUM turning-point charts.

use crate::bundle::DatasetBundle;
use crate::commands::MomentumArgs;
use crate::io::write_atomic;
use crate::svg::{cusum_chart, line_chart, stacked_area_chart, Series, P1_COLOR, P2_COLOR};
use anyhow::{bail, Result};
use mlab_core::momentum::compute_momentum;
use mlab_core::signals::cusum;
use mlab_core::Player;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumCmdConfig {
    pub dataset: PathBuf,
    /// Defaults to the dataset's first match.
    pub match_id: Option<String>,
    pub momentum: MomentumArgs,
    pub out: PathBuf,
    pub svg: Option<PathBuf>,
}

/// Sibling chart path: `momentum.svg` -> `momentum.<suffix>.svg`.
fn chart_sibling(svg: &Path, suffix: &str) -> PathBuf {
    let stem = svg
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "chart".to_string());
    svg.with_file_name(format!("{stem}.{suffix}.svg"))
}

pub fn run(cfg: &MomentumCmdConfig) -> Result<Vec<PathBuf>> {
    let bundle = DatasetBundle::load(&cfg.dataset)?;
    let match_id = match &cfg.match_id {
        Some(id) => id.clone(),
        None => match bundle.dataset.matches.keys().next() {
            Some(id) => id.clone(),
            None => bail!("dataset has no matches"),
        },
    };
    let points = match bundle.dataset.matches.get(&match_id) {
        Some(points) => points,
        None => bail!("match `{match_id}` not found in dataset"),
    };

    let series = compute_momentum(points, &cfg.momentum.to_config())?;
    write_atomic(&cfg.out, &series.to_csv())?;
    let mut outputs = vec![cfg.out.clone()];

    if let Some(svg_path) = &cfg.svg {
        let p1 = series.player(Player::P1);
        let p2 = series.player(Player::P2);
        let line = line_chart(
            &format!("Momentum - {match_id}"),
            "point",
            "momentum",
            &[
                Series {
                    name: "P1",
                    color: P1_COLOR,
                    values: p1,
                },
                Series {
                    name: "P2",
                    color: P2_COLOR,
                    values: p2,
                },
            ],
        );
        write_atomic(svg_path, &line)?;
        outputs.push(svg_path.clone());

        let stacked = stacked_area_chart(
            &format!("Momentum share - {match_id}"),
            "point",
            "momentum",
            Series {
                name: "P1",
                color: P1_COLOR,
                values: p1,
            },
            Series {
                name: "P2",
                color: P2_COLOR,
                values: p2,
            },
        );
        let stacked_path = chart_sibling(svg_path, "stacked");
        write_atomic(&stacked_path, &stacked)?;
        outputs.push(stacked_path);

        let trace1 = cusum(p1)?;
        let trace2 = cusum(p2)?;
        let cusum_svg = cusum_chart(
            &format!("Momentum CUSUM and turning points - {match_id}"),
            &[
                ("P1", P1_COLOR, &trace1.s, &trace1.turning_points),
                ("P2", P2_COLOR, &trace2.s, &trace2.turning_points),
            ],
        );
        let cusum_path = chart_sibling(svg_path, "cusum");
        write_atomic(&cusum_path, &cusum_svg)?;
        outputs.push(cusum_path);
    }
    Ok(outputs)
}
