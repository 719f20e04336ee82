//! The four gossip-rate allocation schemes behind a common interface.
//!
//! A policy decides who gossips, at what aggregate rate, and whether a fired
//! transmission actually lands. Decisions depend on node identity only
//! through the state (ages, windows), never through the index itself, so all
//! four schemes are symmetric.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{PolicyKind, SimConfig};
use crate::state::NetworkState;

/// Rate-allocation callbacks consumed by the engine.
///
/// All query methods are O(1); `per_node_rates` is the diagnostic exception.
pub trait Policy {
    fn kind(&self) -> PolicyKind;

    /// Called after the source version has been incremented.
    fn on_source_self_update(&mut self, state: &NetworkState);

    /// Called after `node`'s version has been reset to the source version.
    fn on_source_to_node(&mut self, state: &NetworkState, node: usize);

    /// Closes `node`'s gossip window if `at` still matches its end time.
    /// Returns false for stale expiries (the window was restarted meanwhile).
    fn on_window_expiry(&mut self, node: usize, at: f64) -> bool;

    /// Earliest live window expiry, as (absolute time, node).
    fn next_window_expiry(&mut self) -> Option<(f64, usize)>;

    /// Aggregate transmission rate over all active gossipers.
    fn gossip_rate_total(&self) -> f64;

    /// Number of simultaneously active gossipers (occupancy).
    fn gossiper_count(&self) -> usize;

    fn is_active(&self, node: usize) -> bool;

    /// Whether a transmission fired by `sender` right now delivers content.
    fn is_effective(&self, sender: usize) -> bool;

    /// Uniform draw among the active gossipers (they all share one rate).
    fn sample_sender(&self, rng: &mut ChaCha8Rng) -> usize;

    /// Instantaneous per-node gossip rates, for tests and diagnostics.
    fn per_node_rates(&self) -> Vec<f64>;

    /// Whether the aggregate rate must stay within the capacity B.
    fn rate_capped(&self) -> bool;
}

/// Builds the policy named by the (validated) configuration.
pub fn build_policy(cfg: &SimConfig) -> Box<dyn Policy> {
    let b = cfg.capacity();
    match cfg.policy {
        PolicyKind::Uniform => Box::new(uniform_policy(cfg.n, b)),
        PolicyKind::SemiDistributed => Box::new(semi_distributed_policy(cfg.n, b)),
        PolicyKind::FullyDistributed => Box::new(fully_distributed_policy(
            cfg.n,
            b,
            cfg.delta.expect("validated config has delta"),
        )),
        PolicyKind::Asuman => Box::new(asuman_policy(cfg.n, b)),
    }
}

// ---------------------------------------------------------------------------
// Uniform baseline
// ---------------------------------------------------------------------------

/// Every node gossips all the time at an equal share B/n of the capacity,
/// so the aggregate rate is exactly B and nothing ever collides.
pub fn uniform_policy(n: usize, capacity: f64) -> UniformPolicy {
    let per_node = if n > 1 { capacity / n as f64 } else { 0.0 };
    UniformPolicy { n, per_node }
}

#[derive(Debug, Clone)]
pub struct UniformPolicy {
    n: usize,
    per_node: f64,
}

impl Policy for UniformPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Uniform
    }

    fn on_source_self_update(&mut self, _state: &NetworkState) {}

    fn on_source_to_node(&mut self, _state: &NetworkState, _node: usize) {}

    fn on_window_expiry(&mut self, _node: usize, _at: f64) -> bool {
        false
    }

    fn next_window_expiry(&mut self) -> Option<(f64, usize)> {
        None
    }

    fn gossip_rate_total(&self) -> f64 {
        self.per_node * self.n as f64
    }

    fn gossiper_count(&self) -> usize {
        self.n
    }

    fn is_active(&self, _node: usize) -> bool {
        true
    }

    fn is_effective(&self, _sender: usize) -> bool {
        true
    }

    fn sample_sender(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(0..self.n)
    }

    fn per_node_rates(&self) -> Vec<f64> {
        vec![self.per_node; self.n]
    }

    fn rate_capped(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Semi-distributed
// ---------------------------------------------------------------------------

/// Exactly the most recently source-updated node gossips, at full capacity.
/// The pilot signal that stops the previous gossiper is instantaneous, so the
/// gossiper set never holds more than one node; before the first
/// source-to-node update nobody gossips.
pub fn semi_distributed_policy(n: usize, capacity: f64) -> SemiDistributedPolicy {
    SemiDistributedPolicy {
        n,
        capacity,
        gossiper: None,
    }
}

#[derive(Debug, Clone)]
pub struct SemiDistributedPolicy {
    n: usize,
    capacity: f64,
    gossiper: Option<usize>,
}

impl SemiDistributedPolicy {
    pub fn gossiper(&self) -> Option<usize> {
        self.gossiper
    }
}

impl Policy for SemiDistributedPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::SemiDistributed
    }

    fn on_source_self_update(&mut self, _state: &NetworkState) {}

    fn on_source_to_node(&mut self, _state: &NetworkState, node: usize) {
        // last update wins: the pilot deactivates whoever was gossiping
        self.gossiper = Some(node);
    }

    fn on_window_expiry(&mut self, _node: usize, _at: f64) -> bool {
        false
    }

    fn next_window_expiry(&mut self) -> Option<(f64, usize)> {
        None
    }

    fn gossip_rate_total(&self) -> f64 {
        if self.gossiper.is_some() && self.n > 1 {
            self.capacity
        } else {
            0.0
        }
    }

    fn gossiper_count(&self) -> usize {
        usize::from(self.gossiper.is_some())
    }

    fn is_active(&self, node: usize) -> bool {
        self.gossiper == Some(node)
    }

    fn is_effective(&self, _sender: usize) -> bool {
        true
    }

    fn sample_sender(&self, _rng: &mut ChaCha8Rng) -> usize {
        self.gossiper.expect("no active gossiper")
    }

    fn per_node_rates(&self) -> Vec<f64> {
        let mut rates = vec![0.0; self.n];
        if self.n > 1 {
            if let Some(g) = self.gossiper {
                rates[g] = self.capacity;
            }
        }
        rates
    }

    fn rate_capped(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Fully-distributed
// ---------------------------------------------------------------------------

/// Every source-updated node gossips at full capacity for a window of length
/// delta; a re-update restarts the window. A transmission lands only if its
/// sender holds the sole open window, otherwise the air is jammed and nothing
/// is delivered.
pub fn fully_distributed_policy(n: usize, capacity: f64, delta: f64) -> FullyDistributedPolicy {
    FullyDistributedPolicy {
        capacity: if n > 1 { capacity } else { 0.0 },
        delta,
        window_end: vec![None; n],
        open: Vec::with_capacity(n),
        slot: vec![usize::MAX; n],
        expiries: std::collections::BinaryHeap::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Expiry {
    time: f64,
    node: usize,
}

// Reverse ordering so the BinaryHeap pops the earliest expiry first.
impl Eq for Expiry {}

impl PartialOrd for Expiry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expiry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .time
            .partial_cmp(&self.time)
            .expect("expiry times are finite")
            .then_with(|| other.node.cmp(&self.node))
    }
}

#[derive(Debug, Clone)]
pub struct FullyDistributedPolicy {
    capacity: f64,
    delta: f64,
    window_end: Vec<Option<f64>>,
    /// Nodes with an open window, in arbitrary order.
    open: Vec<usize>,
    /// Index of each node inside `open`, usize::MAX when closed.
    slot: Vec<usize>,
    /// Pending expiries with lazy deletion: restarted windows leave a stale
    /// entry behind that is skipped when it surfaces.
    expiries: std::collections::BinaryHeap<Expiry>,
}

impl FullyDistributedPolicy {
    pub fn window_end(&self, node: usize) -> Option<f64> {
        self.window_end[node]
    }

    fn open_window(&mut self, node: usize, end: f64) {
        if self.window_end[node].is_none() {
            self.slot[node] = self.open.len();
            self.open.push(node);
        }
        self.window_end[node] = Some(end);
        self.expiries.push(Expiry { time: end, node });
    }

    fn close_window(&mut self, node: usize) {
        self.window_end[node] = None;
        let at = self.slot[node];
        let last = self.open.pop().expect("open set not empty");
        if last != node {
            self.open[at] = last;
            self.slot[last] = at;
        }
        self.slot[node] = usize::MAX;
    }
}

impl Policy for FullyDistributedPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::FullyDistributed
    }

    fn on_source_self_update(&mut self, _state: &NetworkState) {}

    fn on_source_to_node(&mut self, state: &NetworkState, node: usize) {
        self.open_window(node, state.clock + self.delta);
    }

    fn on_window_expiry(&mut self, node: usize, at: f64) -> bool {
        if self.window_end[node] != Some(at) {
            return false;
        }
        if let Some(&head) = self.expiries.peek() {
            if head.node == node && head.time == at {
                self.expiries.pop();
            }
        }
        self.close_window(node);
        true
    }

    fn next_window_expiry(&mut self) -> Option<(f64, usize)> {
        while let Some(&head) = self.expiries.peek() {
            if self.window_end[head.node] == Some(head.time) {
                return Some((head.time, head.node));
            }
            self.expiries.pop();
        }
        None
    }

    fn gossip_rate_total(&self) -> f64 {
        // each open window transmits at the full capacity; the excess over B
        // manifests as collisions, not as extra throughput
        self.capacity * self.open.len() as f64
    }

    fn gossiper_count(&self) -> usize {
        self.open.len()
    }

    fn is_active(&self, node: usize) -> bool {
        self.window_end[node].is_some()
    }

    fn is_effective(&self, _sender: usize) -> bool {
        self.open.len() == 1
    }

    fn sample_sender(&self, rng: &mut ChaCha8Rng) -> usize {
        self.open[rng.random_range(0..self.open.len())]
    }

    fn per_node_rates(&self) -> Vec<f64> {
        let mut rates = vec![0.0; self.window_end.len()];
        for &node in &self.open {
            rates[node] = self.capacity;
        }
        rates
    }

    fn rate_capped(&self) -> bool {
        false
    }
}

// ---------------------------------------------------------------------------
// ASUMAN benchmark
// ---------------------------------------------------------------------------

/// Frame-based age-aware benchmark. At every source self-update a new frame
/// starts: the minimum-age nodes split the capacity equally and gossip for
/// the whole frame. Membership is frozen until the next frame, so mid-frame
/// source-to-node updates do not promote newly fresh nodes.
pub fn asuman_policy(n: usize, capacity: f64) -> AsumanPolicy {
    AsumanPolicy {
        capacity: if n > 1 { capacity } else { 0.0 },
        // at t = 0 everyone is fresh, so the initial frame holds all nodes
        frame: (0..n).collect(),
        in_frame: vec![true; n],
    }
}

#[derive(Debug, Clone)]
pub struct AsumanPolicy {
    capacity: f64,
    frame: Vec<usize>,
    in_frame: Vec<bool>,
}

impl AsumanPolicy {
    pub fn frame(&self) -> &[usize] {
        &self.frame
    }

    pub fn per_gossiper_rate(&self) -> f64 {
        if self.frame.is_empty() {
            0.0
        } else {
            self.capacity / self.frame.len() as f64
        }
    }
}

impl Policy for AsumanPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Asuman
    }

    fn on_source_self_update(&mut self, state: &NetworkState) {
        // new frame: freeze the current minimum-age set (ties all included)
        self.in_frame.iter_mut().for_each(|f| *f = false);
        self.frame.clear();
        let freshest = state.node_versions.iter().copied().max().unwrap_or(0);
        for (i, &v) in state.node_versions.iter().enumerate() {
            if v == freshest {
                self.frame.push(i);
                self.in_frame[i] = true;
            }
        }
    }

    fn on_source_to_node(&mut self, _state: &NetworkState, _node: usize) {}

    fn on_window_expiry(&mut self, _node: usize, _at: f64) -> bool {
        false
    }

    fn next_window_expiry(&mut self) -> Option<(f64, usize)> {
        None
    }

    fn gossip_rate_total(&self) -> f64 {
        if self.frame.is_empty() {
            0.0
        } else {
            self.capacity
        }
    }

    fn gossiper_count(&self) -> usize {
        self.frame.len()
    }

    fn is_active(&self, node: usize) -> bool {
        self.in_frame[node]
    }

    fn is_effective(&self, _sender: usize) -> bool {
        true
    }

    fn sample_sender(&self, rng: &mut ChaCha8Rng) -> usize {
        self.frame[rng.random_range(0..self.frame.len())]
    }

    fn per_node_rates(&self) -> Vec<f64> {
        let mut rates = vec![0.0; self.in_frame.len()];
        let per = self.per_gossiper_rate();
        for &node in &self.frame {
            rates[node] = per;
        }
        rates
    }

    fn rate_capped(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;

    fn state(n: usize) -> NetworkState {
        NetworkState::new(n)
    }

    #[test]
    fn uniform_splits_capacity_equally() {
        let p = uniform_policy(10, 10.0);
        assert_eq!(p.per_node_rates(), vec![1.0; 10]);
        assert_eq!(p.gossip_rate_total(), 10.0);
        assert_eq!(p.gossiper_count(), 10);
        assert!(p.is_effective(3));
    }

    #[test]
    fn uniform_single_node_never_gossips() {
        let p = uniform_policy(1, 5.0);
        assert_eq!(p.gossip_rate_total(), 0.0);
    }

    #[test]
    fn semi_last_update_wins() {
        let st = state(8);
        let mut p = semi_distributed_policy(8, 8.0);
        assert_eq!(p.gossiper(), None);
        assert_eq!(p.gossip_rate_total(), 0.0);
        p.on_source_to_node(&st, 3);
        p.on_source_to_node(&st, 5);
        assert_eq!(p.gossiper(), Some(5));
        assert!(p.is_active(5));
        assert!(!p.is_active(3));
        assert_eq!(p.gossip_rate_total(), 8.0);
        assert_eq!(p.gossiper_count(), 1);
        let mut rng = trial_rng(0, 0);
        assert_eq!(p.sample_sender(&mut rng), 5);
    }

    #[test]
    fn fully_window_opens_and_expires() {
        let mut st = state(4);
        st.clock = 1.0;
        let mut p = fully_distributed_policy(4, 4.0, 0.5);
        p.on_source_to_node(&st, 2);
        assert_eq!(p.window_end(2), Some(1.5));
        assert_eq!(p.next_window_expiry(), Some((1.5, 2)));
        assert!(p.is_effective(2));
        assert_eq!(p.gossip_rate_total(), 4.0);
        assert!(p.on_window_expiry(2, 1.5));
        assert_eq!(p.gossiper_count(), 0);
        assert_eq!(p.next_window_expiry(), None);
    }

    #[test]
    fn fully_restart_invalidates_old_expiry() {
        let mut st = state(4);
        st.clock = 1.0;
        let mut p = fully_distributed_policy(4, 4.0, 0.5);
        p.on_source_to_node(&st, 2);
        st.clock = 1.2;
        p.on_source_to_node(&st, 2); // restart: end moves to 1.7
        assert_eq!(p.window_end(2), Some(1.7));
        assert_eq!(p.gossiper_count(), 1);
        // the stale 1.5 entry must not surface
        assert_eq!(p.next_window_expiry(), Some((1.7, 2)));
        assert!(!p.on_window_expiry(2, 1.5));
        assert!(p.on_window_expiry(2, 1.7));
        assert_eq!(p.gossiper_count(), 0);
    }

    #[test]
    fn fully_overlapping_windows_jam_the_channel() {
        let mut st = state(4);
        st.clock = 0.0;
        let mut p = fully_distributed_policy(4, 4.0, 1.0);
        p.on_source_to_node(&st, 0);
        st.clock = 0.3;
        p.on_source_to_node(&st, 3);
        assert_eq!(p.gossiper_count(), 2);
        assert_eq!(p.gossip_rate_total(), 8.0); // rate may exceed B, throughput may not
        assert!(!p.is_effective(0));
        assert!(!p.is_effective(3));
        // earliest expiry restores effectiveness
        let (t, node) = p.next_window_expiry().unwrap();
        assert_eq!((t, node), (1.0, 0));
        assert!(p.on_window_expiry(node, t));
        assert!(p.is_effective(3));
    }

    #[test]
    fn asuman_unique_minimum_gets_full_capacity() {
        let mut st = state(3);
        st.source_version = 2;
        st.node_versions = vec![0, 2, 0]; // ages (2, 0, 2)
        let mut p = asuman_policy(3, 3.0);
        st.source_version = 3; // frame boundary right after a self-update
        p.on_source_self_update(&st);
        assert_eq!(p.frame(), &[1]);
        assert_eq!(p.per_gossiper_rate(), 3.0);
        assert_eq!(p.gossip_rate_total(), 3.0);
    }

    #[test]
    fn asuman_ties_split_the_capacity() {
        let mut st = state(3);
        st.source_version = 4;
        st.node_versions = vec![3, 3, 0]; // ages (1, 1, 4)
        let mut p = asuman_policy(3, 3.0);
        p.on_source_self_update(&st);
        assert_eq!(p.frame(), &[0, 1]);
        assert_eq!(p.per_gossiper_rate(), 1.5);
        let rates = p.per_node_rates();
        assert_eq!(rates, vec![1.5, 1.5, 0.0]);
    }

    #[test]
    fn asuman_frame_is_frozen_between_boundaries() {
        let mut st = state(3);
        st.source_version = 3;
        st.node_versions = vec![3, 0, 0];
        let mut p = asuman_policy(3, 3.0);
        p.on_source_self_update(&st);
        assert_eq!(p.frame(), &[0]);
        // a mid-frame delivery to node 2 does not promote it
        st.node_versions[2] = 3;
        p.on_source_to_node(&st, 2);
        assert_eq!(p.frame(), &[0]);
        // ...until the next frame boundary
        st.source_version = 4;
        p.on_source_self_update(&st);
        assert_eq!(p.frame(), &[0, 2]);
    }

    #[test]
    fn capped_policies_never_exceed_capacity() {
        // drive random event sequences and re-check the cap at every rebuild
        let mut rng = trial_rng(99, 0);
        for n in [2usize, 5, 16] {
            let b = n as f64;
            let mut st = state(n);
            let mut policies: Vec<Box<dyn Policy>> = vec![
                Box::new(uniform_policy(n, b)),
                Box::new(semi_distributed_policy(n, b)),
                Box::new(asuman_policy(n, b)),
            ];
            for step in 0..500 {
                st.clock = step as f64 * 0.01;
                if rng.random_range(0..2) == 0 {
                    st.source_version += 1;
                    for p in policies.iter_mut() {
                        p.on_source_self_update(&st);
                    }
                } else {
                    let node = rng.random_range(0..n);
                    st.node_versions[node] = st.source_version;
                    for p in policies.iter_mut() {
                        p.on_source_to_node(&st, node);
                    }
                }
                for p in policies.iter() {
                    assert!(p.rate_capped());
                    let total: f64 = p.per_node_rates().iter().sum();
                    assert!(total <= b * (1.0 + 1e-12));
                    assert!((total - p.gossip_rate_total()).abs() <= b * 1e-12);
                }
            }
        }
    }
}
