//! Command implementations. Each command resolves its flags into a
//! serializable config, runs as a pure function of that config, writes
//! its outputs atomically, and records a manifest.

pub mod analyze;
pub mod ingest;
pub mod momentum;
pub mod montecarlo;
pub mod synth;
pub mod train;

use crate::io::reroot;
use crate::manifest::{manifest_path_for, RunManifest};
use anyhow::Result;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub use analyze::AnalyzeConfig;
pub use ingest::IngestConfig;
pub use momentum::MomentumCmdConfig;
pub use montecarlo::MonteCarloConfig;
pub use synth::SynthCmdConfig;
pub use train::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommandConfig {
    Ingest(IngestConfig),
    Train(TrainConfig),
    Momentum(MomentumCmdConfig),
    Analyze(AnalyzeConfig),
    MonteCarlo(MonteCarloConfig),
    Synth(SynthCmdConfig),
}

impl CommandConfig {
    pub fn command_name(&self) -> &'static str {
        match self {
            CommandConfig::Ingest(_) => "ingest",
            CommandConfig::Train(_) => "train",
            CommandConfig::Momentum(_) => "momentum",
            CommandConfig::Analyze(_) => "analyze",
            CommandConfig::MonteCarlo(_) => "montecarlo",
            CommandConfig::Synth(_) => "synth",
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            CommandConfig::Ingest(c) => vec![c.input.clone()],
            CommandConfig::Train(c) => vec![c.dataset.clone()],
            CommandConfig::Momentum(c) => vec![c.dataset.clone()],
            CommandConfig::Analyze(c) => vec![c.dataset.clone()],
            CommandConfig::MonteCarlo(c) => vec![c.dataset.clone()],
            CommandConfig::Synth(_) => Vec::new(),
        }
    }

    /// Redirect every output path into `dir`, keeping file names; inputs
    /// stay put. Used by `replay --out-dir`.
    pub fn reroot_outputs(&mut self, dir: &Path) {
        match self {
            CommandConfig::Ingest(c) => c.out = reroot(&c.out, dir),
            CommandConfig::Train(c) => {
                c.model_out = reroot(&c.model_out, dir);
                c.metrics_out = reroot(&c.metrics_out, dir);
            }
            CommandConfig::Momentum(c) => {
                c.out = reroot(&c.out, dir);
                c.svg = c.svg.as_ref().map(|p| reroot(p, dir));
            }
            CommandConfig::Analyze(c) => c.out_dir = dir.to_path_buf(),
            CommandConfig::MonteCarlo(c) => {
                c.out = reroot(&c.out, dir);
                c.svg = c.svg.as_ref().map(|p| reroot(p, dir));
            }
            CommandConfig::Synth(c) => c.out = reroot(&c.out, dir),
        }
    }

    /// Execute, returning every output file written (manifest excluded).
    pub fn run(&self) -> Result<Vec<PathBuf>> {
        match self {
            CommandConfig::Ingest(c) => ingest::run(c),
            CommandConfig::Train(c) => train::run(c),
            CommandConfig::Momentum(c) => momentum::run(c),
            CommandConfig::Analyze(c) => analyze::run(c),
            CommandConfig::MonteCarlo(c) => montecarlo::run(c),
            CommandConfig::Synth(c) => synth::run(c),
        }
    }

    /// Run, then write the manifest next to the primary output.
    pub fn run_with_manifest(&self) -> Result<(Vec<PathBuf>, PathBuf)> {
        let outputs = self.run()?;
        let primary = outputs.first().cloned().unwrap_or_else(|| "run".into());
        let manifest = RunManifest::new(
            self.command_name(),
            self.inputs(),
            self.clone(),
            outputs.clone(),
        );
        let path = manifest_path_for(&primary);
        crate::io::write_atomic(&path, &manifest.to_json())?;
        Ok((outputs, path))
    }
}

/// Shared momentum-formula flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, clap::Args)]
pub struct MomentumArgs {
    /// Sliding window length in points.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Per-point geometric decay in (0, 1].
    #[arg(long, default_value_t = 0.8)]
    pub decay: f64,
    /// Score for winning a point on serve.
    #[arg(long, default_value_t = 1.0)]
    pub serve_weight: f64,
    /// Score for winning a point on return (a break weighs more).
    #[arg(long, default_value_t = 1.5)]
    pub return_weight: f64,
    /// Bonus per consecutive win beyond the first.
    #[arg(long, default_value_t = 0.1)]
    pub streak_bonus: f64,
    /// Cap on the total streak bonus.
    #[arg(long, default_value_t = 0.5)]
    pub streak_cap: f64,
}

impl Default for MomentumArgs {
    fn default() -> Self {
        MomentumArgs {
            window: 10,
            decay: 0.8,
            serve_weight: 1.0,
            return_weight: 1.5,
            streak_bonus: 0.1,
            streak_cap: 0.5,
        }
    }
}

impl MomentumArgs {
    pub fn to_config(&self) -> mlab_core::MomentumConfig {
        mlab_core::MomentumConfig {
            window: self.window,
            decay: self.decay,
            serve_win_weight: self.serve_weight,
            return_win_weight: self.return_weight,
            streak_bonus: self.streak_bonus,
            streak_bonus_cap: self.streak_cap,
        }
    }
}
