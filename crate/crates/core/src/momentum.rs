//! Per-player momentum from point outcomes.
//!
//! Each won point scores its weight (serve wins and return wins weigh
//! differently; a streak adds a capped bonus), and momentum at point t is
//! the decayed sum of the last `window` point scores. Everything is
//! causal: the value at t depends only on points up to t.

use crate::ingest::{Player, PointRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MomentumError {
    #[error("match has no points")]
    EmptyMatch,
    #[error("invalid momentum config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumConfig {
    /// Sliding window length in points.
    pub window: usize,
    /// Per-point geometric decay in (0, 1].
    pub decay: f64,
    pub serve_win_weight: f64,
    /// A break of serve carries more momentum than a hold.
    pub return_win_weight: f64,
    /// Bonus per consecutive win beyond the first.
    pub streak_bonus: f64,
    /// Upper bound on the total streak bonus.
    pub streak_bonus_cap: f64,
}

impl Default for MomentumConfig {
    fn default() -> Self {
        MomentumConfig {
            window: 10,
            decay: 0.8,
            serve_win_weight: 1.0,
            return_win_weight: 1.5,
            streak_bonus: 0.1,
            streak_bonus_cap: 0.5,
        }
    }
}

impl MomentumConfig {
    pub fn validate(&self) -> Result<(), MomentumError> {
        let bad = |msg: String| Err(MomentumError::InvalidConfig(msg));
        if self.window == 0 {
            return bad("window must be at least 1".to_string());
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return bad(format!("decay must be in (0, 1], got {}", self.decay));
        }
        if self.serve_win_weight <= 0.0 || self.return_win_weight <= 0.0 {
            return bad("win weights must be positive".to_string());
        }
        if self.streak_bonus < 0.0 || self.streak_bonus_cap < 0.0 {
            return bad("streak bonus and cap must be non-negative".to_string());
        }
        Ok(())
    }

    /// Largest value a single point can contribute.
    pub fn max_point_score(&self) -> f64 {
        self.serve_win_weight.max(self.return_win_weight) * (1.0 + self.streak_bonus_cap)
    }

    /// Geometric bound on any momentum value: max score times the window's
    /// decay mass.
    pub fn momentum_bound(&self) -> f64 {
        let mass = if self.decay < 1.0 {
            (1.0 - self.decay.powi(self.window as i32)) / (1.0 - self.decay)
        } else {
            self.window as f64
        };
        self.max_point_score() * mass
    }
}

/// Momentum values for both players, aligned 1:1 with the match's points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumSeries {
    pub match_id: String,
    /// Indexed by `Player::index()`.
    pub values: [Vec<f64>; 2],
    /// (set_no, game_no, point_no) per point, for serialization.
    pub point_keys: Vec<(u32, u32, u32)>,
    pub config: MomentumConfig,
}

impl MomentumSeries {
    pub fn len(&self) -> usize {
        self.point_keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_keys.is_empty()
    }

    pub fn player(&self, p: Player) -> &[f64] {
        &self.values[p.index()]
    }

    /// CSV with one row per point and both players' momentum.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "match_id,point_index,set_no,game_no,point_no,p1_momentum,p2_momentum\n",
        );
        for (i, (set_no, game_no, point_no)) in self.point_keys.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.match_id,
                i + 1,
                set_no,
                game_no,
                point_no,
                self.values[0][i],
                self.values[1][i]
            ));
        }
        out
    }
}

/// Per-point base scores for one player: weight when they won the point
/// (with streak bonus), 0 otherwise.
fn point_scores(points: &[PointRecord], player: Player, cfg: &MomentumConfig) -> Vec<f64> {
    let mut scores = Vec::with_capacity(points.len());
    let mut streak = 0usize;
    for p in points {
        if p.point_victor == player {
            streak += 1;
            let weight = if p.server == player {
                cfg.serve_win_weight
            } else {
                cfg.return_win_weight
            };
            let bonus = (cfg.streak_bonus * (streak - 1) as f64).min(cfg.streak_bonus_cap);
            scores.push(weight * (1.0 + bonus));
        } else {
            streak = 0;
            scores.push(0.0);
        }
    }
    scores
}

pub fn compute_momentum(
    points: &[PointRecord],
    cfg: &MomentumConfig,
) -> Result<MomentumSeries, MomentumError> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(MomentumError::EmptyMatch);
    }
    let n = points.len();
    let mut values = [vec![0.0; n], vec![0.0; n]];
    for player in [Player::P1, Player::P2] {
        let scores = point_scores(points, player, cfg);
        let out = &mut values[player.index()];
        for (t, slot) in out.iter_mut().enumerate() {
            let start = (t + 1).saturating_sub(cfg.window);
            let mut m = 0.0;
            for (i, s) in scores[start..=t].iter().enumerate() {
                m += cfg.decay.powi((t - start - i) as i32) * s;
            }
            *slot = m;
        }
    }
    Ok(MomentumSeries {
        match_id: points[0].match_id.clone(),
        values,
        point_keys: points.iter().map(|p| p.key()).collect(),
        config: *cfg,
    })
}

/// First difference per player, with delta_1 = M_1.
pub fn momentum_delta(series: &MomentumSeries) -> [Vec<f64>; 2] {
    let diff = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, x)| if i == 0 { *x } else { x - v[i - 1] })
            .collect()
    };
    [diff(&series.values[0]), diff(&series.values[1])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::testutil::record;

    /// Build a match from (server, victor) pairs.
    pub(crate) fn match_points(outcomes: &[(Player, Player)]) -> Vec<PointRecord> {
        outcomes
            .iter()
            .enumerate()
            .map(|(i, (server, victor))| {
                let mut r = record("m", 1, 1 + (i / 4) as u32, 1 + (i % 4) as u32);
                r.server = *server;
                r.point_victor = *victor;
                r
            })
            .collect()
    }

    fn plain_cfg(window: usize, decay: f64) -> MomentumConfig {
        MomentumConfig {
            window,
            decay,
            serve_win_weight: 1.0,
            return_win_weight: 1.0,
            streak_bonus: 0.0,
            streak_bonus_cap: 0.0,
        }
    }

    #[test]
    fn window_of_one_is_the_outcome_indicator() {
        use Player::*;
        let points = match_points(&[(P1, P1), (P1, P2), (P2, P1), (P2, P2)]);
        let series = compute_momentum(&points, &plain_cfg(1, 0.37)).unwrap();
        assert_eq!(series.player(P1), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(series.player(P2), &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn hand_computed_three_point_window() {
        use Player::*;
        // P1 wins points 1 and 2 serving, loses point 3.
        let points = match_points(&[(P1, P1), (P1, P1), (P1, P2)]);
        let series = compute_momentum(&points, &plain_cfg(3, 0.5)).unwrap();
        let m = series.player(P1);
        assert!((m[2] - 0.75).abs() < 1e-15, "M_3 = {}", m[2]);
        assert_eq!(m[0], 1.0);
        assert!((m[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn return_win_weighs_more() {
        use Player::*;
        let cfg = MomentumConfig {
            window: 1,
            decay: 1.0,
            serve_win_weight: 1.0,
            return_win_weight: 1.5,
            streak_bonus: 0.0,
            streak_bonus_cap: 0.0,
        };
        // P1 breaks serve on point 1, holds on point 2.
        let points = match_points(&[(P2, P1), (P1, P1)]);
        let series = compute_momentum(&points, &cfg).unwrap();
        assert_eq!(series.player(P1), &[1.5, 1.0]);
    }

    #[test]
    fn streak_bonus_caps() {
        use Player::*;
        let cfg = MomentumConfig {
            window: 1,
            decay: 1.0,
            serve_win_weight: 1.0,
            return_win_weight: 1.0,
            streak_bonus: 0.1,
            streak_bonus_cap: 0.25,
        };
        let points = match_points(&[(P1, P1); 6]);
        let series = compute_momentum(&points, &cfg).unwrap();
        // Streak bonuses: 0, .1, .2, .25 (capped), .25, .25
        let expect = [1.0, 1.1, 1.2, 1.25, 1.25, 1.25];
        for (m, e) in series.player(P1).iter().zip(expect) {
            assert!((m - e).abs() < 1e-12, "{m} vs {e}");
        }
    }

    #[test]
    fn zero_case_player_without_wins() {
        use Player::*;
        let points = match_points(&[(P1, P1); 12]);
        let series = compute_momentum(&points, &MomentumConfig::default()).unwrap();
        assert!(series.player(P2).iter().all(|&m| m == 0.0));
        assert!(series.player(P1).iter().all(|&m| m > 0.0));
    }

    #[test]
    fn causality_prefix_invariance() {
        use Player::*;
        let outcomes: Vec<(Player, Player)> = (0..30)
            .map(|i| {
                let server = if (i / 4) % 2 == 0 { P1 } else { P2 };
                let victor = if (i * 7) % 3 == 0 { P1 } else { P2 };
                (server, victor)
            })
            .collect();
        let points = match_points(&outcomes);
        let cfg = MomentumConfig::default();
        let full = compute_momentum(&points, &cfg).unwrap();
        for t in [1usize, 7, 15, 29] {
            let prefix = compute_momentum(&points[..t], &cfg).unwrap();
            for p in [P1, P2] {
                assert_eq!(&full.player(p)[..t], prefix.player(p));
            }
        }
    }

    #[test]
    fn geometric_bound_holds_and_is_approached() {
        use Player::*;
        let cfg = MomentumConfig::default();
        let bound = cfg.momentum_bound();
        // P1 wins every point returning: the heavier weight, max streak.
        let points = match_points(&[(P2, P1); 40]);
        let series = compute_momentum(&points, &cfg).unwrap();
        for &m in series.player(P1) {
            assert!(m <= bound + 1e-12);
        }
        let peak = series.player(P1).iter().cloned().fold(0.0, f64::max);
        assert!(peak > 0.9 * bound, "peak {peak} far from bound {bound}");
    }

    #[test]
    fn empty_match_rejected() {
        assert!(matches!(
            compute_momentum(&[], &MomentumConfig::default()),
            Err(MomentumError::EmptyMatch)
        ));
    }

    #[test]
    fn deltas() {
        let series = MomentumSeries {
            match_id: "m".to_string(),
            values: [vec![0.0, 1.0, 0.5], vec![0.75, 0.75, 0.75]],
            point_keys: vec![(1, 1, 1), (1, 1, 2), (1, 1, 3)],
            config: MomentumConfig::default(),
        };
        let deltas = momentum_delta(&series);
        assert_eq!(deltas[0], vec![0.0, 1.0, -0.5]);
        assert_eq!(deltas[1], vec![0.75, 0.0, 0.0]);
    }

    #[test]
    fn csv_shape() {
        use Player::*;
        let points = match_points(&[(P1, P1), (P1, P2)]);
        let series = compute_momentum(&points, &plain_cfg(2, 0.5)).unwrap();
        let csv = series.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "match_id,point_index,set_no,game_no,point_no,p1_momentum,p2_momentum"
        );
        assert_eq!(csv.lines().count(), 3);
    }
}
