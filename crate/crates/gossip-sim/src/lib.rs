//! Event-driven simulator and analytical toolkit for version-age dynamics in
//! fully-connected gossip networks.
//!
//! A source updates itself with Poisson rate `lambda_e` and pushes fresh
//! versions into a network of `n` nodes with total rate `lambda`. The nodes
//! relay their freshest version to random peers under a total instantaneous
//! gossip capacity `B` (default `n * lambda`). The crate provides:
//!
//! * [`engine`] — a continuous-time event kernel with exact piecewise-constant
//!   age integration,
//! * [`policies`] — four capacity-allocation schemes (uniform baseline,
//!   semi-distributed, fully-distributed with gossip windows, and the
//!   frame-based ASUMAN benchmark),
//! * [`analytics`] — closed-form mean-age predictors, asymptotes and the
//!   symmetric-policy lower bound,
//! * [`queue`] — a standalone M/D/inf occupancy simulator used to validate the
//!   stationary law behind the fully-distributed analysis,
//! * [`harness`] — parameter sweeps with per-trial parallelism, confidence
//!   intervals and CSV / plot-data emission.
//!
//! Everything is deterministic: one root seed derives independent per-trial
//! streams (see [`rng`]), so identical configurations reproduce identical
//! trajectories bit for bit.

pub mod analytics;
pub mod config;
pub mod engine;
pub mod harness;
pub mod policies;
pub mod queue;
pub mod rng;
pub mod state;

pub use config::{validate_config, ConfigError, PolicyKind, SimConfig};
pub use engine::{run, run_trial, EventCounts, TrialResult};
pub use state::{AgeAccumulator, NetworkState};
