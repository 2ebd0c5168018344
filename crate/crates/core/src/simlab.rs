//! Robustness harness: repeated random-split Monte Carlo evaluation with
//! histogram/KDE summaries, and a synthetic match generator with a
//! controllable momentum coupling that serves as the test substrate.

use crate::fusion::{fit_stacking, fit_weighted, FusionError};
use crate::ingest::{
    ColumnInfo, ColumnKind, FeatureMatrix, MatchDataset, Player, PointRecord,
};
use crate::learners::{
    evaluate, split_train_test, train, LearnError, LearnerSpec, MetricId, Task,
};
use crate::seed::{derive_seed, derive_seed2};
use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("samples have zero spread; no density curve")]
    ZeroSpread,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("iteration {iteration} failed: {reason}")]
    IterationFailed { iteration: usize, reason: String },
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// What to train on each Monte Carlo iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelRecipe {
    Single(LearnerSpec),
    WeightedFusion { specs: Vec<LearnerSpec>, k: usize },
    StackingFusion { specs: Vec<LearnerSpec>, k: usize },
}

impl ModelRecipe {
    pub fn id(&self) -> String {
        match self {
            ModelRecipe::Single(spec) => spec.kind().name().to_string(),
            ModelRecipe::WeightedFusion { .. } => "fusion_weighted".to_string(),
            ModelRecipe::StackingFusion { .. } => "fusion_stacking".to_string(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn evaluate_split(
        &self,
        fm: &FeatureMatrix,
        target: &[f64],
        task: Task,
        ratio: f64,
        metric: MetricId,
        split_seed: u64,
        cv_seed: u64,
    ) -> Result<f64, SimError> {
        let split = split_train_test(fm, target, ratio, split_seed)?;
        let predictions = match self {
            ModelRecipe::Single(spec) => {
                let model = train(spec, &split.train_x, &split.train_y, task)?;
                model.predict(&split.test_x)?
            }
            ModelRecipe::WeightedFusion { specs, k } => {
                let model = fit_weighted(specs, &split.train_x, &split.train_y, *k, cv_seed)
                    .map_err(flatten_fusion)?;
                model.predict(&split.test_x).map_err(flatten_fusion)?
            }
            ModelRecipe::StackingFusion { specs, k } => {
                let model = fit_stacking(specs, &split.train_x, &split.train_y, *k, cv_seed)
                    .map_err(flatten_fusion)?;
                model.predict(&split.test_x).map_err(flatten_fusion)?
            }
        };
        let metrics = evaluate(&predictions, &split.test_y, task)?;
        Ok(metric.extract(&metrics)?)
    }
}

fn flatten_fusion(e: FusionError) -> SimError {
    match e {
        FusionError::Learn(inner) => SimError::Learn(inner),
        other => SimError::InvalidConfig(other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub mean: f64,
    /// Sample standard deviation (n-1); 0 for a single iteration.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// bin_count + 1 edges, ascending.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub model_id: String,
    pub n_iterations: usize,
    pub metric: MetricId,
    /// One metric value per iteration, in iteration order.
    pub samples: Vec<f64>,
    pub summary: McSummary,
    pub histogram: Histogram,
    /// Absent when every sample is identical.
    pub density: Option<DensityCurve>,
    pub master_seed: u64,
}

impl McReport {
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("iteration,value\n");
        for (i, s) in self.samples.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, s));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

fn summarize(samples: &[f64]) -> McSummary {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    McSummary {
        mean,
        std,
        min: sorted[0],
        max: sorted[n - 1],
        q05: quantile(&sorted, 0.05),
        q50: quantile(&sorted, 0.50),
        q95: quantile(&sorted, 0.95),
    }
}

fn histogram(samples: &[f64]) -> Histogram {
    let n = samples.len();
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Histogram {
            edges: vec![min, max],
            counts: vec![n],
        };
    }
    let bins = ((n as f64).sqrt().ceil() as usize).clamp(1, 50);
    let width = (max - min) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| min + width * i as f64).collect();
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let mut b = ((s - min) / width) as usize;
        if b >= bins {
            b = bins - 1;
        }
        counts[b] += 1;
    }
    Histogram { edges, counts }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Silverman's rule: 0.9 * min(std, IQR/1.34) * n^(-1/5).
    Auto,
    Fixed(f64),
}

/// Gaussian kernel density on a 256-point grid spanning
/// [min - 3h, max + 3h].
pub fn kde(samples: &[f64], bandwidth: Bandwidth) -> Result<DensityCurve, SimError> {
    let n = samples.len();
    let h = match bandwidth {
        Bandwidth::Fixed(h) => {
            if !(h > 0.0 && h.is_finite()) {
                return Err(SimError::InvalidConfig(format!(
                    "bandwidth must be positive, got {h}"
                )));
            }
            if n == 0 {
                return Err(SimError::TooFewSamples { needed: 1, got: 0 });
            }
            h
        }
        Bandwidth::Auto => {
            if n < 2 {
                return Err(SimError::TooFewSamples { needed: 2, got: n });
            }
            let mean = samples.iter().sum::<f64>() / n as f64;
            let std = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
                / (n - 1) as f64)
                .sqrt();
            let mut sorted = samples.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
            let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
            // min over the positive candidates; a zero IQR alone must not
            // zero the bandwidth.
            let spread = match (std > 0.0, iqr > 0.0) {
                (true, true) => std.min(iqr / 1.34),
                (true, false) => std,
                (false, true) => iqr / 1.34,
                (false, false) => return Err(SimError::ZeroSpread),
            };
            0.9 * spread * (n as f64).powf(-0.2)
        }
    };

    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = (min - 3.0 * h, max + 3.0 * h);
    let grid_len = 256usize;
    let step = (hi - lo) / (grid_len - 1) as f64;
    let norm = 1.0 / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let grid: Vec<f64> = (0..grid_len).map(|i| lo + step * i as f64).collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|g| {
            norm * samples
                .iter()
                .map(|x| (-0.5 * ((g - x) / h).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    Ok(DensityCurve {
        grid,
        values,
        bandwidth: h,
    })
}

/// Repeated random-split evaluation: iteration i splits with a seed
/// derived from (master_seed, i), trains fresh, and scores the held-out
/// rows. Iterations are independent, so execution order cannot change the
/// report.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo(
    recipe: &ModelRecipe,
    fm: &FeatureMatrix,
    target: &[f64],
    task: Task,
    n: usize,
    ratio: f64,
    metric: MetricId,
    master_seed: u64,
) -> Result<McReport, SimError> {
    if n == 0 {
        return Err(SimError::InvalidConfig(
            "need at least one iteration".to_string(),
        ));
    }
    let samples: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            recipe
                .evaluate_split(
                    fm,
                    target,
                    task,
                    ratio,
                    metric,
                    derive_seed(master_seed, i as u64),
                    derive_seed2(master_seed, i as u64, 1),
                )
                .map_err(|e| SimError::IterationFailed {
                    iteration: i,
                    reason: e.to_string(),
                })
        })
        .collect::<Result<_, _>>()?;

    let summary = summarize(&samples);
    let hist = histogram(&samples);
    let density = match kde(&samples, Bandwidth::Auto) {
        Ok(curve) => Some(curve),
        Err(SimError::ZeroSpread) | Err(SimError::TooFewSamples { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(McReport {
        model_id: recipe.id(),
        n_iterations: n,
        metric,
        samples,
        summary,
        histogram: hist,
        density,
        master_seed,
    })
}

/// Synthetic match generator. Service alternates every 4 points; a game
/// goes to the player with more points in its block (ties to the server)
/// and a set to the first player with 6 games.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthMatchConfig {
    pub match_id: String,
    pub n_points: usize,
    /// P(P1 wins | P1 serves).
    pub p1_serve_win_prob: f64,
    /// P(P1 wins | P2 serves).
    pub p1_return_win_prob: f64,
    /// How strongly recent net wins shift the next-point probability.
    pub momentum_coupling: f64,
    pub seed: u64,
}

impl SynthMatchConfig {
    pub fn new(match_id: &str, n_points: usize, seed: u64) -> SynthMatchConfig {
        SynthMatchConfig {
            match_id: match_id.to_string(),
            n_points,
            p1_serve_win_prob: 0.65,
            p1_return_win_prob: 0.35,
            momentum_coupling: 0.0,
            seed,
        }
    }

    pub fn with_coupling(mut self, coupling: f64) -> SynthMatchConfig {
        self.momentum_coupling = coupling;
        self
    }

    pub fn with_probs(mut self, serve: f64, ret: f64) -> SynthMatchConfig {
        self.p1_serve_win_prob = serve;
        self.p1_return_win_prob = ret;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.n_points == 0 {
            return bad("n_points must be at least 1".to_string());
        }
        for (name, p) in [
            ("p1_serve_win_prob", self.p1_serve_win_prob),
            ("p1_return_win_prob", self.p1_return_win_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.momentum_coupling < 0.0 {
            return bad(format!(
                "momentum_coupling must be non-negative, got {}",
                self.momentum_coupling
            ));
        }
        Ok(())
    }
}

const POINTS_PER_GAME: usize = 4;
const GAMES_PER_SET: u32 = 6;
/// Recent-point window feeding the coupling shift.
const COUPLING_WINDOW: usize = 5;

pub fn generate_match(cfg: &SynthMatchConfig) -> Result<Vec<PointRecord>, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut points = Vec::with_capacity(cfg.n_points);
    let mut recent: Vec<Player> = Vec::new();

    let mut set_no = 1u32;
    let mut game_no = 1u32;
    let mut sets = [0u32; 2];
    let mut games_in_set = [0u32; 2];
    let mut points_won = [0u32; 2];
    let mut game_points = [0u32; 2];
    let mut game_index = 0usize; // global, drives service alternation

    for i in 0..cfg.n_points {
        let point_in_game = i % POINTS_PER_GAME;
        let server = if game_index.is_multiple_of(2) {
            Player::P1
        } else {
            Player::P2
        };

        let base = if server == Player::P1 {
            cfg.p1_serve_win_prob
        } else {
            cfg.p1_return_win_prob
        };
        let net_recent: f64 = recent
            .iter()
            .map(|w| if *w == Player::P1 { 1.0 } else { -1.0 })
            .sum::<f64>()
            / COUPLING_WINDOW as f64;
        // Clamp so coupling never pushes past (0.01, 0.99), but a base
        // probability outside that band is honored as given.
        let lo = base.min(0.01);
        let hi = base.max(0.99);
        let p1_wins_prob = (base + cfg.momentum_coupling * net_recent).clamp(lo, hi);

        let victor = if rng.random::<f64>() < p1_wins_prob {
            Player::P1
        } else {
            Player::P2
        };
        points_won[victor.index()] += 1;
        game_points[victor.index()] += 1;
        recent.push(victor);
        if recent.len() > COUPLING_WINDOW {
            recent.remove(0);
        }

        points.push(PointRecord {
            match_id: cfg.match_id.clone(),
            player1: "P1".to_string(),
            player2: "P2".to_string(),
            set_no,
            game_no,
            point_no: point_in_game as u32 + 1,
            server,
            point_victor: victor,
            p1_sets: sets[0],
            p2_sets: sets[1],
            p1_points_won: points_won[0],
            p2_points_won: points_won[1],
            speed_mph: None,
            rally_count: None,
            p1_distance_run: None,
            p2_distance_run: None,
            return_depth: None,
            extra: IndexMap::new(),
        });

        if point_in_game == POINTS_PER_GAME - 1 {
            let game_winner = if game_points[0] > game_points[1] {
                Player::P1
            } else if game_points[1] > game_points[0] {
                Player::P2
            } else {
                server
            };
            games_in_set[game_winner.index()] += 1;
            game_points = [0, 0];
            game_index += 1;
            if games_in_set[game_winner.index()] >= GAMES_PER_SET {
                sets[game_winner.index()] += 1;
                games_in_set = [0, 0];
                set_no += 1;
                game_no = 1;
            } else {
                game_no += 1;
            }
        }
    }
    Ok(points)
}

/// Wrap generated matches into a dataset with the columns the generator
/// fills.
pub fn to_dataset(matches: Vec<Vec<PointRecord>>) -> MatchDataset {
    let mut map: IndexMap<String, Vec<PointRecord>> = IndexMap::new();
    for points in matches {
        if let Some(first) = points.first() {
            map.insert(first.match_id.clone(), points);
        }
    }
    let catalog = [
        ("match_id", ColumnKind::Categorical),
        ("player1", ColumnKind::Categorical),
        ("player2", ColumnKind::Categorical),
        ("set_no", ColumnKind::Numeric),
        ("game_no", ColumnKind::Numeric),
        ("point_no", ColumnKind::Numeric),
        ("server", ColumnKind::Numeric),
        ("point_victor", ColumnKind::Numeric),
        ("p1_sets", ColumnKind::Numeric),
        ("p2_sets", ColumnKind::Numeric),
        ("p1_points_won", ColumnKind::Numeric),
        ("p2_points_won", ColumnKind::Numeric),
    ]
    .into_iter()
    .map(|(name, kind)| ColumnInfo {
        name: name.to_string(),
        kind,
        missing_count: 0,
    })
    .collect();
    MatchDataset {
        matches: map,
        column_catalog: catalog,
    }
}
