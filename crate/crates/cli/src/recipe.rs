//! Parse `--model` recipes for the Monte Carlo command.
//!
//! Grammar: `<kind>[:key=value[,key=value...]]` where kind is one of
//! svm, rf, gbt, logistic, weighted, stacking. Fusion recipes accept
//! `k=<folds>` plus GBT/RF keys, which adjust their embedded base specs.

use anyhow::{bail, Result};
use mlab_core::learners::{ForestParams, GbtParams, LearnerSpec, ModelParams};
use mlab_core::seed::derive_seed;
use mlab_core::simlab::ModelRecipe;

pub fn parse_recipe(text: &str, seed: u64) -> Result<ModelRecipe> {
    let (kind, opts) = match text.split_once(':') {
        Some((k, rest)) => (k.trim(), parse_opts(rest)?),
        None => (text.trim(), Vec::new()),
    };

    let mut k_folds = 10usize;
    let mut gbt = GbtParams::default();
    let mut forest = ForestParams::default();
    let mut svm = mlab_core::learners::SvmParams::default();
    let mut logistic = mlab_core::learners::LogisticParams::default();
    for (key, value) in &opts {
        match key.as_str() {
            "k" => k_folds = parse_num(key, value)?,
            "num_round" => gbt.num_round = parse_num(key, value)?,
            "learning_rate" => gbt.learning_rate = parse_float(key, value)?,
            "max_depth" => {
                gbt.max_depth = parse_num(key, value)?;
                forest.max_depth = gbt.max_depth;
            }
            "min_samples_leaf" => {
                gbt.min_samples_leaf = parse_num(key, value)?;
                forest.min_samples_leaf = gbt.min_samples_leaf;
            }
            "n_trees" => forest.n_trees = parse_num(key, value)?,
            "feature_subsample" => forest.feature_subsample = parse_float(key, value)?,
            "bootstrap" => forest.bootstrap = parse_bool(key, value)?,
            "c" => svm.c = parse_float(key, value)?,
            "epochs" => {
                svm.epochs = parse_num(key, value)?;
                logistic.epochs = svm.epochs;
            }
            "l2_penalty" => logistic.l2_penalty = parse_float(key, value)?,
            other => bail!("unknown recipe option `{other}`"),
        }
    }

    let single = |params: ModelParams, stream: u64| {
        ModelRecipe::Single(LearnerSpec {
            params,
            seed: derive_seed(seed, stream),
        })
    };
    let base_specs = || {
        vec![
            LearnerSpec {
                params: ModelParams::SvmLinear(svm),
                seed: derive_seed(seed, 11),
            },
            LearnerSpec {
                params: ModelParams::RandomForest(forest),
                seed: derive_seed(seed, 12),
            },
            LearnerSpec {
                params: ModelParams::Gbt(gbt),
                seed: derive_seed(seed, 13),
            },
        ]
    };

    let recipe = match kind {
        "svm" => single(ModelParams::SvmLinear(svm), 1),
        "rf" => single(ModelParams::RandomForest(forest), 2),
        "gbt" => single(ModelParams::Gbt(gbt), 3),
        "logistic" => single(ModelParams::Logistic(logistic), 4),
        "weighted" => ModelRecipe::WeightedFusion {
            specs: base_specs(),
            k: k_folds,
        },
        "stacking" => ModelRecipe::StackingFusion {
            specs: base_specs(),
            k: k_folds,
        },
        other => bail!(
            "unknown model kind `{other}` (expected svm, rf, gbt, logistic, weighted, stacking)"
        ),
    };
    Ok(recipe)
}

fn parse_opts(text: &str) -> Result<Vec<(String, String)>> {
    text.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| match part.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => bail!("recipe option `{part}` is not key=value"),
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| anyhow::anyhow!("recipe option `{key}`: `{value}` is not a valid number"))
}

fn parse_float(key: &str, value: &str) -> Result<f64> {
    parse_num(key, value)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => bail!("recipe option `{key}`: `{value}` is not a boolean"),
    }
}
