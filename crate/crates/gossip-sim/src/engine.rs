//! Continuous-time event kernel.
//!
//! All stochastic transitions are superposed Poisson streams, so one
//! aggregate exponential clock followed by a categorical draw reproduces the
//! exact dynamics in O(1) per event. Deterministic window expiries are merged
//! in from the policy's pending queue; re-sampling the exponential clock
//! after every event is statistically exact by memorylessness.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::config::{PolicyKind, SimConfig};
use crate::policies::{build_policy, Policy};
use crate::rng::trial_rng;
use crate::state::{AgeAccumulator, NetworkState, StateError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("sender {sender} is not an active gossiper")]
    SenderNotActive { sender: usize },
    #[error("version counter overflow")]
    VersionOverflow,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Instantaneous exponential-clock rates of the three stochastic streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTable {
    /// Source self-update rate (lambda_e).
    pub source_self: f64,
    /// Total source-to-node rate (lambda), split uniformly over the nodes.
    pub source_to_node: f64,
    /// Aggregate transmission rate over all active gossipers.
    pub gossip_total: f64,
}

impl RateTable {
    pub fn total(&self) -> f64 {
        self.source_self + self.source_to_node + self.gossip_total
    }

    pub fn is_valid(&self) -> bool {
        [self.source_self, self.source_to_node, self.gossip_total]
            .iter()
            .all(|r| r.is_finite() && *r >= 0.0)
    }
}

/// Event categories of the network dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    SourceSelfUpdate,
    SourceToNode(usize),
    GossipTransmission { sender: usize, target: usize },
    WindowExpiry(usize),
    /// ASUMAN frame boundary; coincides with a source self-update.
    FrameBoundary,
}

/// What the clock race produced: one of the stochastic categories, or the
/// earliest pending deterministic event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextEvent {
    SourceSelfUpdate,
    SourceToNode,
    GossipTransmission,
    Deterministic,
}

/// Samples the next event: an exponential inter-arrival with the current
/// total stochastic rate races the earliest pending deterministic event
/// (given as a time advance). Returns the winning time advance and category;
/// the category is chosen proportionally to the rates. Targets are resolved
/// by the caller, uniformly.
pub fn next_event(
    rates: &RateTable,
    next_deterministic: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> (f64, NextEvent) {
    debug_assert!(rates.is_valid());
    let total = rates.total();
    let stochastic_dt = if total > 0.0 {
        let e: f64 = Exp1.sample(rng);
        e / total
    } else {
        f64::INFINITY
    };
    if let Some(det_dt) = next_deterministic {
        if det_dt <= stochastic_dt {
            return (det_dt, NextEvent::Deterministic);
        }
    }
    let mut u = rng.random::<f64>() * total;
    u -= rates.source_self;
    if u < 0.0 {
        return (stochastic_dt, NextEvent::SourceSelfUpdate);
    }
    u -= rates.source_to_node;
    if u < 0.0 {
        return (stochastic_dt, NextEvent::SourceToNode);
    }
    (stochastic_dt, NextEvent::GossipTransmission)
}

/// Applies one gossip transmission. When `effective`, the target keeps the
/// fresher of the two versions (its age becomes `min` of the two ages);
/// a collided transmission leaves the state untouched. Returns whether the
/// target's version actually changed.
pub fn deliver_gossip(
    state: &mut NetworkState,
    policy: &dyn Policy,
    sender: usize,
    target: usize,
    effective: bool,
) -> Result<bool, EngineError> {
    debug_assert_ne!(sender, target);
    if !policy.is_active(sender) {
        return Err(EngineError::SenderNotActive { sender });
    }
    let sender_version = *state
        .node_versions
        .get(sender)
        .ok_or(StateError::IndexOutOfRange {
            index: sender,
            n: state.len(),
        })?;
    let target_version = *state
        .node_versions
        .get(target)
        .ok_or(StateError::IndexOutOfRange {
            index: target,
            n: state.len(),
        })?;
    if effective && sender_version > target_version {
        state.node_versions[target] = sender_version;
        return Ok(true);
    }
    Ok(false)
}

/// Event tallies over one trial, by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub source_self_updates: u64,
    pub source_to_node_updates: u64,
    pub gossip_transmissions: u64,
    /// Transmissions fired while the channel was jammed (fully-distributed).
    pub gossip_collisions: u64,
    pub window_expiries: u64,
    pub frame_boundaries: u64,
}

impl EventCounts {
    fn record(&mut self, kind: &EventKind) {
        match kind {
            EventKind::SourceSelfUpdate => self.source_self_updates += 1,
            EventKind::SourceToNode(_) => self.source_to_node_updates += 1,
            EventKind::GossipTransmission { .. } => self.gossip_transmissions += 1,
            EventKind::WindowExpiry(_) => self.window_expiries += 1,
            EventKind::FrameBoundary => self.frame_boundaries += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.source_self_updates
            + self.source_to_node_updates
            + self.gossip_transmissions
            + self.window_expiries
    }
}

/// Time-average statistics of one simulated trajectory over
/// `[burn_in, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Time-average version age per node.
    pub per_node_mean_age: Vec<f64>,
    /// Average of the per-node means (the network mean age).
    pub mean_age: f64,
    /// Time-average of the minimum age over the network.
    pub mean_min_age: f64,
    /// Fraction of time spent with exactly k active gossipers, by k.
    pub occupancy_fractions: Vec<f64>,
    pub counts: EventCounts,
    /// Length of the measured window (horizon - burn_in).
    pub measured_time: f64,
}

impl TrialResult {
    /// Mean number of simultaneously active gossipers.
    pub fn mean_gossipers(&self) -> f64 {
        self.occupancy_fractions
            .iter()
            .enumerate()
            .map(|(k, f)| k as f64 * f)
            .sum()
    }
}

/// Runs trial 0 of the configuration. See [`run_trial`].
pub fn run(cfg: &SimConfig) -> Result<TrialResult, EngineError> {
    run_trial(cfg, 0)
}

/// Simulates `[0, horizon]` and returns time averages over
/// `[burn_in, horizon]`. Deterministic given `(cfg, trial)`: the RNG stream
/// is derived from the config seed and the trial index.
pub fn run_trial(cfg: &SimConfig, trial: u64) -> Result<TrialResult, EngineError> {
    let mut policy = build_policy(cfg);
    let rng = trial_rng(cfg.seed, trial);
    run_with_policy(cfg, policy.as_mut(), rng)
}

/// Simulation loop against an externally constructed policy.
pub fn run_with_policy(
    cfg: &SimConfig,
    policy: &mut dyn Policy,
    mut rng: ChaCha8Rng,
) -> Result<TrialResult, EngineError> {
    let n = cfg.n;
    let capacity = cfg.capacity();
    let mut state = NetworkState::new(n);
    let mut acc = AgeAccumulator::new(n, cfg.burn_in);
    let mut counts = EventCounts::default();
    // the minimum age resets to zero on any source-to-node update and grows
    // by one on each self-update; gossip can never go below it
    let mut min_age: u64 = 0;

    loop {
        let gossip_total = policy.gossip_rate_total();
        debug_assert!(
            !policy.rate_capped() || gossip_total <= capacity * (1.0 + 1e-9),
            "aggregate gossip rate {gossip_total} exceeds capacity {capacity}"
        );
        let rates = RateTable {
            source_self: cfg.lambda_e,
            source_to_node: cfg.lambda,
            gossip_total,
        };
        let pending = policy.next_window_expiry();
        let det_dt = pending.map(|(t, _)| t - state.clock);
        let (dt, what) = next_event(&rates, det_dt, &mut rng);
        let now = state.clock + dt;
        if now >= cfg.horizon {
            acc.advance(
                state.clock,
                cfg.horizon,
                state.source_version,
                min_age,
                policy.gossiper_count(),
            );
            state.clock = cfg.horizon;
            break;
        }
        acc.advance(
            state.clock,
            now,
            state.source_version,
            min_age,
            policy.gossiper_count(),
        );
        state.clock = now;

        // resolve targets uniformly, then apply the concrete event
        let event = match what {
            NextEvent::SourceSelfUpdate => EventKind::SourceSelfUpdate,
            NextEvent::SourceToNode => EventKind::SourceToNode(rng.random_range(0..n)),
            NextEvent::GossipTransmission => {
                let sender = policy.sample_sender(&mut rng);
                let mut target = rng.random_range(0..n - 1);
                if target >= sender {
                    target += 1;
                }
                EventKind::GossipTransmission { sender, target }
            }
            NextEvent::Deterministic => {
                let (_, node) = pending.expect("deterministic winner implies a pending expiry");
                EventKind::WindowExpiry(node)
            }
        };
        match event {
            EventKind::SourceSelfUpdate => {
                state.source_version = state
                    .source_version
                    .checked_add(1)
                    .ok_or(EngineError::VersionOverflow)?;
                min_age += 1;
                counts.record(&event);
                policy.on_source_self_update(&state);
                if policy.kind() == PolicyKind::Asuman {
                    // a self-update starts a new frame
                    counts.record(&EventKind::FrameBoundary);
                }
            }
            EventKind::SourceToNode(node) => {
                let old = state.node_versions[node];
                if old != state.source_version {
                    acc.record_version_change(node, old, now);
                    state.node_versions[node] = state.source_version;
                }
                min_age = 0;
                counts.record(&event);
                policy.on_source_to_node(&state, node);
            }
            EventKind::GossipTransmission { sender, target } => {
                debug_assert!(
                    policy.kind() != PolicyKind::SemiDistributed
                        || state.source_version - state.node_versions[sender] == min_age,
                    "semi-distributed gossiper must hold the minimum age"
                );
                let effective = policy.is_effective(sender);
                if !effective {
                    counts.gossip_collisions += 1;
                }
                let old = state.node_versions[target];
                if deliver_gossip(&mut state, policy, sender, target, effective)? {
                    acc.record_version_change(target, old, now);
                }
                counts.record(&event);
            }
            EventKind::WindowExpiry(node) => {
                let (at, _) = pending.expect("deterministic winner implies a pending expiry");
                if policy.on_window_expiry(node, at) {
                    counts.record(&event);
                }
            }
            EventKind::FrameBoundary => unreachable!("frames piggyback on self-updates"),
        }
    }

    acc.finalize(&state.node_versions, state.clock);
    let measured = acc.accumulated_time();
    let per_node_mean_age: Vec<f64> = acc
        .per_node_age_integral()
        .iter()
        .map(|&integral| integral / measured)
        .collect();
    let mean_age = per_node_mean_age.iter().sum::<f64>() / n as f64;
    Ok(TrialResult {
        mean_age,
        mean_min_age: acc.min_age_integral() / measured,
        per_node_mean_age,
        occupancy_fractions: acc.occupancy_fractions(),
        counts,
        measured_time: measured,
    })
}
