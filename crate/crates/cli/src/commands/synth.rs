//! `mlab synth`: generate synthetic matches in the ingest CSV schema.

use crate::io::write_atomic;
use anyhow::Result;
use mlab_core::ingest::write_csv_string;
use mlab_core::seed::derive_seed;
use mlab_core::simlab::{generate_match, to_dataset, SynthMatchConfig};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCmdConfig {
    pub points: usize,
    pub matches: usize,
    pub coupling: f64,
    pub serve_prob: f64,
    pub return_prob: f64,
    pub seed: u64,
    pub match_id_prefix: String,
    pub out: PathBuf,
}

pub fn run(cfg: &SynthCmdConfig) -> Result<Vec<PathBuf>> {
    let matches: Vec<_> = (0..cfg.matches)
        .map(|i| {
            let match_cfg = SynthMatchConfig {
                match_id: format!("{}-{:03}", cfg.match_id_prefix, i + 1),
                n_points: cfg.points,
                p1_serve_win_prob: cfg.serve_prob,
                p1_return_win_prob: cfg.return_prob,
                momentum_coupling: cfg.coupling,
                seed: derive_seed(cfg.seed, i as u64),
            };
            generate_match(&match_cfg)
        })
        .collect::<Result<_, _>>()?;
    let ds = to_dataset(matches);
    write_atomic(&cfg.out, &write_csv_string(&ds))?;
    Ok(vec![cfg.out.clone()])
}
