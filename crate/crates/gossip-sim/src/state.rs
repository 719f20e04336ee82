//! Network state and exact age-integral bookkeeping.
//!
//! Versions are monotone counters; the age of node `i` is the subtraction
//! `source_version - node_versions[i]`, which makes non-negativity structural
//! and keeps source self-updates O(1). The same idea extends to time
//! integrals: instead of adding `age * dt` to every node on every event, the
//! accumulator integrates the source counter globally and each node counter
//! lazily (a node's counter is constant between deliveries), and recovers
//! per-node age integrals as the difference at finalization.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
}

/// Per-node version counters, the source counter and the simulation clock.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub source_version: u64,
    pub node_versions: Vec<u64>,
    pub clock: f64,
}

impl NetworkState {
    /// Everyone starts fresh: all counters zero, all ages zero.
    pub fn new(n: usize) -> Self {
        NetworkState {
            source_version: 0,
            node_versions: vec![0; n],
            clock: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.node_versions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_versions.is_empty()
    }

    /// Version age of node `i`: how many versions it lags the source.
    pub fn age_of(&self, i: usize) -> Result<u64, StateError> {
        match self.node_versions.get(i) {
            Some(&v) => Ok(self.source_version - v),
            None => Err(StateError::IndexOutOfRange {
                index: i,
                n: self.len(),
            }),
        }
    }

    /// Minimum age over all nodes (O(n) scan; the engine tracks it O(1)).
    pub fn min_age(&self) -> u64 {
        let freshest = self.node_versions.iter().copied().max().unwrap_or(0);
        self.source_version - freshest
    }
}

/// Piecewise-constant time integrals of per-node age, minimum age and
/// gossiper-count occupancy over `[burn_in, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeAccumulator {
    burn_in: f64,
    accumulated_time: f64,
    source_integral: f64,
    min_age_integral: f64,
    occupancy_integral: Vec<f64>,
    node_version_integral: Vec<f64>,
    node_since: Vec<f64>,
    finalized_at: Option<f64>,
}

impl AgeAccumulator {
    pub fn new(n: usize, burn_in: f64) -> Self {
        AgeAccumulator {
            burn_in,
            accumulated_time: 0.0,
            source_integral: 0.0,
            min_age_integral: 0.0,
            occupancy_integral: vec![0.0; n + 1],
            node_version_integral: vec![0.0; n],
            node_since: vec![0.0; n],
            finalized_at: None,
        }
    }

    /// Length of `[from, to]` past the burn-in boundary.
    fn measured(&self, from: f64, to: f64) -> f64 {
        (to - from.max(self.burn_in)).max(0.0)
    }

    /// Integrates the piecewise-constant quantities over `[from, to]`, during
    /// which the source counter, the minimum age and the gossiper count are
    /// all constant. The prefix before `burn_in` contributes nothing.
    pub fn advance(
        &mut self,
        from: f64,
        to: f64,
        source_version: u64,
        min_age: u64,
        gossiper_count: usize,
    ) {
        debug_assert!(to >= from);
        let dt = self.measured(from, to);
        if dt <= 0.0 {
            return;
        }
        self.accumulated_time += dt;
        self.source_integral += source_version as f64 * dt;
        self.min_age_integral += min_age as f64 * dt;
        if gossiper_count >= self.occupancy_integral.len() {
            self.occupancy_integral.resize(gossiper_count + 1, 0.0);
        }
        self.occupancy_integral[gossiper_count] += dt;
    }

    /// Flushes node `i`'s contribution up to `now`, just before its version
    /// counter changes away from `old_version`.
    pub fn record_version_change(&mut self, node: usize, old_version: u64, now: f64) {
        let dt = self.measured(self.node_since[node], now);
        if dt > 0.0 {
            self.node_version_integral[node] += old_version as f64 * dt;
        }
        self.node_since[node] = now;
    }

    /// Flushes every node up to `end` (the measurement horizon).
    pub fn finalize(&mut self, versions: &[u64], end: f64) {
        debug_assert_eq!(versions.len(), self.node_version_integral.len());
        for (i, &v) in versions.iter().enumerate() {
            self.record_version_change(i, v, end);
        }
        self.finalized_at = Some(end);
    }

    pub fn accumulated_time(&self) -> f64 {
        self.accumulated_time
    }

    pub fn min_age_integral(&self) -> f64 {
        self.min_age_integral
    }

    /// `integral of (source_version - node_version) dt` per node. Requires a
    /// prior [`finalize`](Self::finalize) so every lazy counter is flushed.
    pub fn per_node_age_integral(&self) -> Vec<f64> {
        debug_assert!(self.finalized_at.is_some(), "finalize before reading");
        self.node_version_integral
            .iter()
            .map(|&vi| self.source_integral - vi)
            .collect()
    }

    pub fn occupancy_integral(&self) -> &[f64] {
        &self.occupancy_integral
    }

    /// Fraction of measured time spent with exactly k active gossipers.
    pub fn occupancy_fractions(&self) -> Vec<f64> {
        if self.accumulated_time <= 0.0 {
            return vec![0.0; self.occupancy_integral.len()];
        }
        self.occupancy_integral
            .iter()
            .map(|&t| t / self.accumulated_time)
            .collect()
    }
}
