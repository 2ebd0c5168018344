//! Match-analytics engine for point-by-point tennis data.
//!
//! The pipeline runs: CSV ingest and cleaning, feature encoding and PCA,
//! three base learners fused by CV-weighted averaging or stacking,
//! sliding-window momentum series, CUSUM turning-point detection,
//! Wald-Wolfowitz runs tests, and a Monte Carlo robustness harness.

pub mod features;
pub mod fusion;
pub mod ingest;
pub mod learners;
pub mod momentum;
pub mod seed;
pub mod signals;
pub mod simlab;

pub use ingest::{FeatureMatrix, MatchDataset, Player, PointRecord, RowKey, Stage};
pub use learners::{LearnerSpec, MetricId, Predictor, Task, TrainedModel};
pub use momentum::{MomentumConfig, MomentumSeries};
pub use signals::{CusumTrace, MatchAnalysis, RunsTestResult};
