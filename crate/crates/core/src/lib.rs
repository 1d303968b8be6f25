//! Nonparametric hypothesis tests for distributions of random graphs.
//!
//! The W statistic measures how far a sample of simple undirected graphs is
//! from a null distribution (or from a second sample) and reduces to the
//! 1-norm between edge-marginal vectors. Around it the crate provides
//! graph samplers (Erdős–Rényi, modified Erdős–Rényi, ERGMs), Monte Carlo and
//! permutation inference, a per-edge Bonferroni baseline, and construction
//! of graph samples from windowed correlations of multichannel signals.

pub mod error;
pub mod format;
pub mod graph;
pub mod models;
pub mod rng;
pub mod statistic;
pub mod testing;
pub mod timeseries;

pub use error::{Error, Result};
pub use graph::{pair_count, EdgeCovariance, EdgeMarginals, Graph, GraphSample, VertexPair};
pub use models::{ErgmStats, ExactDistribution, McmcConfig, ModelKind, ModelSpec};
pub use rng::{stream_rng, SimRng};
pub use statistic::{SampleKind, WValue};
pub use testing::{NullHypothesis, PowerPoint, TestResult};
