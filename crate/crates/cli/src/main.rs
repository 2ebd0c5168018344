//! `mlab`: point-by-point tennis momentum analytics.
//!
//! Pipeline commands: `synth` generates data, `ingest` builds the
//! dataset bundle, `train` fits fused learners, `momentum` and `analyze`
//! compute the momentum/turning-point statistics, `montecarlo` measures
//! robustness, and `replay` re-runs any recorded manifest.

mod bundle;
mod commands;
mod errors;
mod io;
mod labels;
mod manifest;
mod recipe;
mod svg;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use commands::{
    AnalyzeConfig, CommandConfig, IngestConfig, MomentumArgs, MomentumCmdConfig,
    MonteCarloConfig, SynthCmdConfig, TrainConfig,
};
use manifest::RunManifest;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mlab",
    version,
    about = "Point-by-point tennis momentum analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a point-log CSV, clean it, and emit the dataset bundle
    Ingest {
        /// Input CSV in the point-log schema
        input: PathBuf,
        /// Output dataset bundle (JSON)
        #[arg(long, default_value = "dataset.json")]
        out: PathBuf,
        /// Drop columns missing at least this fraction of values
        #[arg(long, default_value_t = 0.10)]
        drop_threshold: f64,
    },
    /// Train SVM/RF/GBT base learners and fuse them
    Train {
        /// Dataset bundle from `mlab ingest`
        dataset: PathBuf,
        /// Fusion mode: weighted or stacking
        #[arg(long, default_value = "weighted")]
        mode: String,
        /// Label source: a binary column name or next-point-victor
        #[arg(long, default_value = labels::NEXT_POINT_VICTOR)]
        label: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Training fraction of the random split
        #[arg(long, default_value_t = 0.7)]
        ratio: f64,
        /// Cross-validation folds
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Boosting rounds for the GBT base
        #[arg(long, default_value_t = 126)]
        num_round: usize,
        /// Trees in the random-forest base
        #[arg(long, default_value_t = 100)]
        n_trees: usize,
        #[arg(long, default_value = "model.json")]
        out: PathBuf,
        #[arg(long, default_value = "metrics.csv")]
        metrics_out: PathBuf,
    },
    /// Momentum series and charts for one match
    Momentum {
        dataset: PathBuf,
        /// Match id (defaults to the dataset's first match)
        #[arg(long = "match")]
        match_id: Option<String>,
        #[command(flatten)]
        momentum: MomentumArgs,
        #[arg(long, default_value = "momentum.csv")]
        out: PathBuf,
        /// Write charts; siblings <stem>.stacked.svg and <stem>.cusum.svg
        /// are emitted next to this path
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Runs tests per match plus the aggregate significance table
    Analyze {
        dataset: PathBuf,
        /// Analyze every match in the dataset (the default)
        #[arg(long, conflicts_with = "match_id")]
        all_matches: bool,
        /// Restrict to one match
        #[arg(long = "match")]
        match_id: Option<String>,
        #[command(flatten)]
        momentum: MomentumArgs,
        /// Momentum dichotomization: above-median or positive-delta
        #[arg(long, default_value = "above-median")]
        rule: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Repeated random-split robustness evaluation
    Montecarlo {
        dataset: PathBuf,
        /// Model recipe: svm | rf | gbt | logistic | weighted | stacking,
        /// with options like gbt:num_round=20,max_depth=3
        #[arg(long, default_value = "gbt:num_round=20")]
        model: String,
        #[arg(long, default_value = labels::NEXT_POINT_VICTOR)]
        label: String,
        #[arg(long, default_value = "accuracy")]
        metric: String,
        /// Number of Monte Carlo iterations
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Training fraction of each random split
        #[arg(long, default_value_t = 0.7)]
        ratio: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "mc.json")]
        out: PathBuf,
        /// Density chart output
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Generate synthetic matches in the ingest CSV schema
    Synth {
        /// Points per match
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Number of matches
        #[arg(long, default_value_t = 1)]
        matches: usize,
        /// Momentum coupling strength (0 = independent points)
        #[arg(long, default_value_t = 0.0)]
        coupling: f64,
        /// P(P1 wins a point on P1's serve)
        #[arg(long, default_value_t = 0.65)]
        serve_prob: f64,
        /// P(P1 wins a point on P2's serve)
        #[arg(long, default_value_t = 0.35)]
        return_prob: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "synth")]
        match_id_prefix: String,
        #[arg(long, default_value = "match.csv")]
        out: PathBuf,
    },
    /// Re-run a recorded manifest, reproducing its outputs byte for byte
    Replay {
        manifest: PathBuf,
        /// Redirect outputs into this directory
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn build_config(command: Command) -> Result<CommandConfig> {
    let config = match command {
        Command::Ingest {
            input,
            out,
            drop_threshold,
        } => CommandConfig::Ingest(IngestConfig {
            input,
            out,
            drop_threshold,
        }),
        Command::Train {
            dataset,
            mode,
            label,
            seed,
            ratio,
            k,
            num_round,
            n_trees,
            out,
            metrics_out,
        } => CommandConfig::Train(TrainConfig {
            dataset,
            mode,
            label,
            seed,
            ratio,
            k,
            num_round,
            n_trees,
            model_out: out,
            metrics_out,
        }),
        Command::Momentum {
            dataset,
            match_id,
            momentum,
            out,
            svg,
        } => CommandConfig::Momentum(MomentumCmdConfig {
            dataset,
            match_id,
            momentum,
            out,
            svg,
        }),
        Command::Analyze {
            dataset,
            all_matches: _,
            match_id,
            momentum,
            rule,
            out_dir,
        } => CommandConfig::Analyze(AnalyzeConfig {
            dataset,
            match_id,
            momentum,
            rule,
            out_dir,
        }),
        Command::Montecarlo {
            dataset,
            model,
            label,
            metric,
            n,
            ratio,
            seed,
            out,
            svg,
        } => CommandConfig::MonteCarlo(MonteCarloConfig {
            dataset,
            model,
            label,
            metric,
            n,
            ratio,
            seed,
            out,
            svg,
        }),
        Command::Synth {
            points,
            matches,
            coupling,
            serve_prob,
            return_prob,
            seed,
            match_id_prefix,
            out,
        } => CommandConfig::Synth(SynthCmdConfig {
            points,
            matches,
            coupling,
            serve_prob,
            return_prob,
            seed,
            match_id_prefix,
            out,
        }),
        Command::Replay { .. } => bail!("replay is dispatched separately"),
    };
    Ok(config)
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("MLAB_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match cli.command {
        Command::Replay { manifest, out_dir } => {
            let loaded = RunManifest::load(&manifest)?;
            let mut config = loaded.config;
            if let Some(dir) = out_dir {
                config.reroot_outputs(&dir);
            }
            config
        }
        other => build_config(other)?,
    };
    let (outputs, manifest_path) = config.run_with_manifest()?;
    for path in &outputs {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", manifest_path.display());
    Ok(())
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("mlab: error: {err:#}");
        std::process::exit(errors::exit_code(&err));
    }
}
