//! Turning-point detection and randomness testing.
//!
//! CUSUM here is retrospective: cumulative sums of deviations from the
//! series mean, with a turning point wherever the sum crosses or touches
//! zero after a nonzero excursion. The Wald-Wolfowitz runs test checks a
//! binary sequence's run count against its null mean and variance using
//! the normal approximation (no continuity correction).

use crate::ingest::{Player, PointRecord};
use crate::momentum::{compute_momentum, MomentumConfig, MomentumError, MomentumSeries};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("series too short: need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("runs test needs both categories present")]
    SingleCategory,
    #[error("runs test variance is zero for n1={n1}, n2={n2}")]
    Degenerate { n1: usize, n2: usize },
    #[error("turning point index {index} exceeds length {length}")]
    IndexOutOfRange { index: usize, length: usize },
    #[error(transparent)]
    Momentum(#[from] MomentumError),
}

/// Tolerance below which a cumulative sum counts as touching zero.
const ZERO_TOUCH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CusumTrace {
    pub input: Vec<f64>,
    /// x_t - mean(x).
    pub deviations: Vec<f64>,
    /// S_t = S_{t-1} + deviations[t], S_0 = 0; the final entry telescopes
    /// to zero.
    pub s: Vec<f64>,
    /// 1-based indices where S crosses or touches zero after a nonzero
    /// excursion, sorted ascending.
    pub turning_points: Vec<usize>,
}

fn touch_sign(x: f64) -> i8 {
    if x.abs() <= ZERO_TOUCH {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

pub fn cusum(series: &[f64]) -> Result<CusumTrace, SignalError> {
    let n = series.len();
    if n < 2 {
        return Err(SignalError::TooShort(n));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let deviations: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let mut s = Vec::with_capacity(n);
    let mut acc = 0.0;
    for d in &deviations {
        acc += d;
        s.push(acc);
    }

    let mut turning_points = Vec::new();
    for t in 1..n {
        let prev = touch_sign(s[t - 1]);
        let here = touch_sign(s[t]);
        if prev != 0 && (here == -prev || here == 0) {
            turning_points.push(t + 1); // 1-based
        }
    }
    Ok(CusumTrace {
        input: series.to_vec(),
        deviations,
        s,
        turning_points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunsTestResult {
    pub sample_size: usize,
    /// Count of ones.
    pub n1: usize,
    /// Count of zeros.
    pub n2: usize,
    /// Observed maximal runs.
    pub runs: usize,
    pub mean_runs: f64,
    pub std_runs: f64,
    pub z: f64,
    /// Two-sided p from the standard normal.
    pub p_value: f64,
    pub significant: bool,
}

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Standard normal two-sided tail probability for |z|.
fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

pub fn runs_test(sequence: &[bool]) -> Result<RunsTestResult, SignalError> {
    let n = sequence.len();
    if n < 2 {
        return Err(SignalError::TooShort(n));
    }
    let n1 = sequence.iter().filter(|&&b| b).count();
    let n2 = n - n1;
    if n1 == 0 || n2 == 0 {
        return Err(SignalError::SingleCategory);
    }
    let runs = 1 + sequence.windows(2).filter(|w| w[0] != w[1]).count();

    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let mean_runs = 2.0 * n1f * n2f / nf + 1.0;
    let var = 2.0 * n1f * n2f * (2.0 * n1f * n2f - nf) / (nf * nf * (nf - 1.0));
    if var <= 0.0 {
        return Err(SignalError::Degenerate { n1, n2 });
    }
    let std_runs = var.sqrt();
    let z = (runs as f64 - mean_runs) / std_runs;
    let p_value = two_sided_p(z);
    Ok(RunsTestResult {
        sample_size: n,
        n1,
        n2,
        runs,
        mean_runs,
        std_runs,
        z,
        p_value,
        significant: p_value < SIGNIFICANCE_LEVEL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinarizeRule {
    /// 1 iff value > median; values equal to the median go to 0.
    AboveMedian,
    /// 1 iff the first difference is positive, with delta_1 = value_1.
    PositiveDelta,
}

impl BinarizeRule {
    pub fn name(self) -> &'static str {
        match self {
            BinarizeRule::AboveMedian => "above_median",
            BinarizeRule::PositiveDelta => "positive_delta",
        }
    }
}

pub fn binarize(series: &[f64], rule: BinarizeRule) -> Vec<bool> {
    match rule {
        BinarizeRule::AboveMedian => {
            let mut sorted = series.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite series"));
            let n = sorted.len();
            let median = if n % 2 == 1 {
                sorted[n / 2]
            } else {
                (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
            };
            series.iter().map(|&v| v > median).collect()
        }
        BinarizeRule::PositiveDelta => series
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == 0 { v > 0.0 } else { v > series[i - 1] })
            .collect(),
    }
}

/// Binary sequence with 1 at each turning-point index.
pub fn turning_point_indicator(
    trace: &CusumTrace,
    length: usize,
) -> Result<Vec<bool>, SignalError> {
    let mut out = vec![false; length];
    for &t in &trace.turning_points {
        if t == 0 || t > length {
            return Err(SignalError::IndexOutOfRange {
                index: t,
                length,
            });
        }
        out[t - 1] = true;
    }
    Ok(out)
}

/// A runs test that may be legitimately inapplicable (e.g. one player
/// never won a point, so their indicator has a single category).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestOutcome {
    Computed(RunsTestResult),
    NotApplicable { reason: String },
}

impl TestOutcome {
    pub fn significant(&self) -> bool {
        matches!(self, TestOutcome::Computed(r) if r.significant)
    }

    pub fn result(&self) -> Option<&RunsTestResult> {
        match self {
            TestOutcome::Computed(r) => Some(r),
            TestOutcome::NotApplicable { .. } => None,
        }
    }
}

fn run_or_na(sequence: &[bool]) -> Result<TestOutcome, SignalError> {
    match runs_test(sequence) {
        Ok(r) => Ok(TestOutcome::Computed(r)),
        Err(SignalError::SingleCategory) => Ok(TestOutcome::NotApplicable {
            reason: "single category".to_string(),
        }),
        Err(SignalError::Degenerate { n1, n2 }) => Ok(TestOutcome::NotApplicable {
            reason: format!("zero variance (n1={n1}, n2={n2})"),
        }),
        Err(e) => Err(e),
    }
}

/// The four per-match tested variables, in output order.
pub const RUNS_VARIABLES: [&str; 4] = [
    "p1_momentum",
    "p2_momentum",
    "p1_turning_points",
    "p2_turning_points",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSignals {
    pub cusum: CusumTrace,
    pub momentum_runs: TestOutcome,
    pub turning_runs: TestOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchAnalysis {
    pub match_id: String,
    pub momentum: MomentumSeries,
    /// Indexed by `Player::index()`.
    pub players: [PlayerSignals; 2],
    pub binarize_rule: BinarizeRule,
}

impl MatchAnalysis {
    /// Outcomes in `RUNS_VARIABLES` order.
    pub fn outcomes(&self) -> [&TestOutcome; 4] {
        [
            &self.players[0].momentum_runs,
            &self.players[1].momentum_runs,
            &self.players[0].turning_runs,
            &self.players[1].turning_runs,
        ]
    }

    /// Per-match CSV: one row per tested variable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("column_name,sample_size,z,P-value\n");
        for (name, outcome) in RUNS_VARIABLES.iter().zip(self.outcomes()) {
            match outcome {
                TestOutcome::Computed(r) => out.push_str(&format!(
                    "{},{},{:.6},{:.6}\n",
                    name, r.sample_size, r.z, r.p_value
                )),
                TestOutcome::NotApplicable { .. } => {
                    out.push_str(&format!("{},{},NA,NA\n", name, self.momentum.len()))
                }
            }
        }
        out
    }
}

/// Momentum, CUSUM turning points, and runs tests on the four per-player
/// variables of one match.
pub fn analyze_match(
    points: &[PointRecord],
    cfg: &MomentumConfig,
    rule: BinarizeRule,
) -> Result<MatchAnalysis, SignalError> {
    let momentum = compute_momentum(points, cfg)?;
    let analyze_player = |player: Player| -> Result<PlayerSignals, SignalError> {
        let series = momentum.player(player);
        let trace = cusum(series)?;
        let momentum_runs = run_or_na(&binarize(series, rule))?;
        let turning_runs = run_or_na(&turning_point_indicator(&trace, series.len())?)?;
        Ok(PlayerSignals {
            cusum: trace,
            momentum_runs,
            turning_runs,
        })
    };
    Ok(MatchAnalysis {
        match_id: momentum.match_id.clone(),
        players: [analyze_player(Player::P1)?, analyze_player(Player::P2)?],
        momentum,
        binarize_rule: rule,
    })
}

/// Descriptive statistics of one variable's significance flags across
/// matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagStats {
    pub variable: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n-1); 0 by convention for one match.
    pub std: f64,
    pub std_defined: bool,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRunsReport {
    /// Per match: match id and the four 0/1 flags in `RUNS_VARIABLES`
    /// order. Inapplicable tests count as 0 (cannot reject randomness).
    pub per_match: Vec<(String, [u8; 4])>,
    pub stats: Vec<FlagStats>,
}

impl AggregateRunsReport {
    /// CSV with one descriptive statistic per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic");
        for v in RUNS_VARIABLES {
            out.push(',');
            out.push_str(v);
        }
        out.push('\n');
        let row = |name: &str, f: &dyn Fn(&FlagStats) -> String| {
            let mut line = name.to_string();
            for s in &self.stats {
                line.push(',');
                line.push_str(&f(s));
            }
            line.push('\n');
            line
        };
        out.push_str(&row("count", &|s| format!("{}", s.count)));
        out.push_str(&row("mean", &|s| format!("{:.6}", s.mean)));
        out.push_str(&row("std", &|s| format!("{:.6}", s.std)));
        out.push_str(&row("min", &|s| format!("{:.6}", s.min)));
        out.push_str(&row("max", &|s| format!("{:.6}", s.max)));
        out
    }
}

pub fn aggregate(matches: &[MatchAnalysis]) -> AggregateRunsReport {
    let per_match: Vec<(String, [u8; 4])> = matches
        .iter()
        .map(|m| {
            let flags = m.outcomes().map(|o| u8::from(o.significant()));
            (m.match_id.clone(), flags)
        })
        .collect();

    let n = per_match.len();
    let stats = RUNS_VARIABLES
        .iter()
        .enumerate()
        .map(|(v, name)| {
            let flags: Vec<f64> = per_match.iter().map(|(_, f)| f[v] as f64).collect();
            let mean = flags.iter().sum::<f64>() / n as f64;
            let std_defined = n > 1;
            let std = if std_defined {
                (flags.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            FlagStats {
                variable: name.to_string(),
                count: n,
                mean,
                std,
                std_defined,
                min: flags.iter().cloned().fold(f64::INFINITY, f64::min),
                max: flags.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();

    AggregateRunsReport { per_match, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::testutil::record;

    #[test]
    fn cusum_constant_series_has_no_turning_points() {
        let trace = cusum(&[3.0, 3.0, 3.0, 3.0]).unwrap();
        assert!(trace.s.iter().all(|&s| s.abs() <= ZERO_TOUCH));
        assert!(trace.turning_points.is_empty());
    }

    #[test]
    fn cusum_hand_example_sign_flip_and_zero_touch() {
        let trace = cusum(&[2.0, -1.0, -2.0, 1.0, 2.0]).unwrap();
        let expect = [1.6, 0.2, -2.2, -1.6, 0.0];
        for (s, e) in trace.s.iter().zip(expect) {
            assert!((s - e).abs() < 1e-12, "{s} vs {e}");
        }
        assert_eq!(trace.turning_points, vec![3, 5]);
    }

    #[test]
    fn cusum_zero_touches_from_positive_excursions() {
        let trace = cusum(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(trace.turning_points, vec![2, 4]);
    }

    #[test]
    fn cusum_telescopes_to_zero() {
        let series = [0.3, 1.9, -0.7, 2.2, 0.1, -3.0, 0.8];
        let trace = cusum(&series).unwrap();
        assert!(trace.s.last().unwrap().abs() < 1e-9);
    }

    #[test]
    fn cusum_too_short() {
        assert!(matches!(cusum(&[1.0]), Err(SignalError::TooShort(1))));
    }

    #[test]
    fn runs_test_alternating() {
        let seq: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        let r = runs_test(&seq).unwrap();
        assert_eq!((r.n1, r.n2, r.runs), (5, 5, 10));
        assert!((r.mean_runs - 6.0).abs() < 1e-12);
        assert!((r.std_runs - 1.4907119849998598).abs() < 1e-10);
        assert!((r.z - 2.6832815729997477).abs() < 1e-10);
        assert!((r.p_value - 0.0073).abs() < 2e-4);
        assert!(r.significant);
    }

    #[test]
    fn runs_test_blocked() {
        let seq: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        let r = runs_test(&seq).unwrap();
        assert_eq!(r.runs, 2);
        assert!((r.z + 2.6832815729997477).abs() < 1e-10);
        assert!(r.significant);
    }

    #[test]
    fn runs_test_small_balanced() {
        // n1 = n2 = 2, R = 3: mean 3, z = 0, p = 1.
        let r = runs_test(&[false, true, true, false]).unwrap();
        assert_eq!(r.runs, 3);
        assert!((r.mean_runs - 3.0).abs() < 1e-12);
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn runs_test_single_category() {
        assert!(matches!(
            runs_test(&[true, true, true]),
            Err(SignalError::SingleCategory)
        ));
    }

    #[test]
    fn runs_test_degenerate_variance() {
        // n1 = n2 = 1: variance is exactly zero.
        assert!(matches!(
            runs_test(&[true, false]),
            Err(SignalError::Degenerate { n1: 1, n2: 1 })
        ));
    }

    #[test]
    fn runs_count_matches_brute_force_exhaustively() {
        for n in 2..=12usize {
            for bits in 0..(1u32 << n) {
                let seq: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
                let ones = seq.iter().filter(|&&b| b).count();
                if ones == 0 || ones == n {
                    continue;
                }
                let brute = 1 + seq.windows(2).filter(|w| w[0] != w[1]).count();
                match runs_test(&seq) {
                    Ok(r) => assert_eq!(r.runs, brute),
                    Err(SignalError::Degenerate { .. }) => {}
                    Err(e) => panic!("unexpected error: {e}"),
                }
            }
        }
    }

    #[test]
    fn z_antisymmetric_around_mean_runs() {
        // For fixed n1, n2, reflecting R about the mean flips z.
        let r1 = runs_test(&[true, true, false, false, true, false]).unwrap();
        let reflected = 2.0 * r1.mean_runs - r1.runs as f64;
        let z_reflected = (reflected - r1.mean_runs) / r1.std_runs;
        assert!((z_reflected + r1.z).abs() < 1e-12);
    }

    #[test]
    fn binarize_above_median() {
        assert_eq!(
            binarize(&[1.0, 2.0, 3.0, 4.0], BinarizeRule::AboveMedian),
            vec![false, false, true, true]
        );
        assert_eq!(
            binarize(&[5.0, 5.0, 5.0], BinarizeRule::AboveMedian),
            vec![false, false, false]
        );
    }

    #[test]
    fn binarize_positive_delta() {
        assert_eq!(
            binarize(&[1.0, 2.0, 3.0], BinarizeRule::PositiveDelta),
            vec![true, true, true]
        );
        assert_eq!(
            binarize(&[0.0, 0.0, 0.0], BinarizeRule::PositiveDelta),
            vec![false, false, false]
        );
        assert_eq!(
            binarize(&[-1.0, 2.0, 1.0], BinarizeRule::PositiveDelta),
            vec![false, true, false]
        );
    }

    #[test]
    fn binarize_median_invariant_under_monotone_transform() {
        let series = [0.4, 1.7, 0.9, 2.5, 0.1, 1.1];
        let direct = binarize(&series, BinarizeRule::AboveMedian);
        let transformed: Vec<f64> = series.iter().map(|v| v.exp() + 3.0).collect();
        assert_eq!(direct, binarize(&transformed, BinarizeRule::AboveMedian));
    }

    #[test]
    fn indicator_marks_turning_points() {
        let trace = cusum(&[2.0, -1.0, -2.0, 1.0, 2.0]).unwrap();
        let ind = turning_point_indicator(&trace, 5).unwrap();
        assert_eq!(ind, vec![false, false, true, false, true]);

        let empty = CusumTrace {
            input: vec![],
            deviations: vec![],
            s: vec![],
            turning_points: vec![],
        };
        assert_eq!(
            turning_point_indicator(&empty, 3).unwrap(),
            vec![false, false, false]
        );
    }

    fn synthetic_match(n: usize, winner: impl Fn(usize) -> Player) -> Vec<PointRecord> {
        (0..n)
            .map(|i| {
                let mut r = record("m1", 1, 1 + (i / 4) as u32, 1 + (i % 4) as u32);
                r.server = if (i / 4) % 2 == 0 { Player::P1 } else { Player::P2 };
                r.point_victor = winner(i);
                r
            })
            .collect()
    }

    #[test]
    fn analyze_degenerate_match() {
        let points = synthetic_match(24, |_| Player::P1);
        let analysis =
            analyze_match(&points, &MomentumConfig::default(), BinarizeRule::AboveMedian)
                .unwrap();
        // P2 never scores: momentum all zero, runs test not applicable.
        assert!(matches!(
            analysis.players[1].momentum_runs,
            TestOutcome::NotApplicable { .. }
        ));
        assert!(!analysis.players[1].momentum_runs.significant());
    }

    #[test]
    fn analyze_carries_sample_size() {
        let points = synthetic_match(170, |i| if i % 3 == 0 { Player::P2 } else { Player::P1 });
        let analysis =
            analyze_match(&points, &MomentumConfig::default(), BinarizeRule::AboveMedian)
                .unwrap();
        for outcome in analysis.outcomes() {
            if let TestOutcome::Computed(r) = outcome {
                assert_eq!(r.sample_size, 170);
            }
        }
        let csv = analysis.to_csv();
        assert!(csv.starts_with("column_name,sample_size,z,P-value\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn alternating_winners_significant() {
        let points = synthetic_match(120, |i| if i % 2 == 0 { Player::P1 } else { Player::P2 });
        let analysis =
            analyze_match(&points, &MomentumConfig::default(), BinarizeRule::AboveMedian)
                .unwrap();
        assert!(analysis.players[0].momentum_runs.significant());
        assert!(analysis.players[1].momentum_runs.significant());
    }

    #[test]
    fn aggregate_statistics() {
        let make = |id: &str, n: usize, p2_every: usize| {
            let points: Vec<PointRecord> = (0..n)
                .map(|i| {
                    let mut r = record(id, 1, 1 + (i / 4) as u32, 1 + (i % 4) as u32);
                    r.point_victor = if i % p2_every == 0 { Player::P2 } else { Player::P1 };
                    r
                })
                .collect();
            analyze_match(&points, &MomentumConfig::default(), BinarizeRule::AboveMedian)
                .unwrap()
        };
        let analyses = vec![make("a", 80, 3), make("b", 80, 4), make("c", 80, 5)];
        let report = aggregate(&analyses);
        assert_eq!(report.per_match.len(), 3);
        for s in &report.stats {
            assert_eq!(s.count, 3);
            assert!((0.0..=1.0).contains(&s.mean));
            let flags: f64 = report
                .per_match
                .iter()
                .map(|(_, f)| {
                    f[RUNS_VARIABLES.iter().position(|v| *v == s.variable).unwrap()] as f64
                })
                .sum();
            assert!((s.mean - flags / 3.0).abs() < 1e-12);
        }
        let csv = report.to_csv();
        assert!(csv.starts_with(
            "statistic,p1_momentum,p2_momentum,p1_turning_points,p2_turning_points\n"
        ));
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn aggregate_single_match_std_undefined() {
        let points = synthetic_match(60, |i| if i % 2 == 0 { Player::P1 } else { Player::P2 });
        let analysis =
            analyze_match(&points, &MomentumConfig::default(), BinarizeRule::AboveMedian)
                .unwrap();
        let report = aggregate(&[analysis]);
        for s in &report.stats {
            assert_eq!(s.std, 0.0);
            assert!(!s.std_defined);
        }
    }

    #[test]
    fn aggregate_all_significant_gives_unit_mean() {
        let mk = |id: &str| {
            let points: Vec<PointRecord> = (0..100)
                .map(|i| {
                    let mut r = record(id, 1, 1 + (i / 4) as u32, 1 + (i % 4) as u32);
                    r.point_victor = if i % 2 == 0 { Player::P1 } else { Player::P2 };
                    r
                })
                .collect();
            analyze_match(&points, &MomentumConfig::default(), BinarizeRule::AboveMedian)
                .unwrap()
        };
        let report = aggregate(&[mk("a"), mk("b")]);
        let momentum_stats = &report.stats[0];
        assert_eq!(momentum_stats.mean, 1.0);
        assert_eq!(momentum_stats.std, 0.0);
    }
}
