//! Standalone M/D/inf occupancy simulator.
//!
//! Arrivals are Poisson with rate lambda and every arrival occupies its own
//! server for exactly delta, so the occupancy at time t counts the arrivals
//! in (t - delta, t]. This is the arrival-level abstraction behind the
//! fully-distributed scheme's effective-rate analysis; the network policy
//! itself uses node-level windows with restarts, and the two are compared by
//! tests rather than assumed equal.

use std::collections::VecDeque;

use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::analytics::{mg_infty_stationary, AnalyticsError};
use crate::rng::trial_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueueError {
    #[error("histogram sums to {sum}, expected 1")]
    UnnormalizedHistogram { sum: f64 },
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

/// Simulates the queue over `[0, horizon]` starting empty and returns the
/// fraction of time spent with exactly k customers, for k = 0..k_max.
pub fn simulate_mdinf(lambda: f64, delta: f64, horizon: f64, seed: u64) -> Vec<f64> {
    assert!(lambda > 0.0 && delta > 0.0 && horizon > 0.0);
    let mut rng = trial_rng(seed, 0);
    let mut draw = || {
        let e: f64 = Exp1.sample(&mut rng);
        e / lambda
    };
    let mut occupancy_time: Vec<f64> = Vec::new();
    // deterministic service keeps departures in arrival order
    let mut departures: VecDeque<f64> = VecDeque::new();
    let mut clock = 0.0;
    let mut next_arrival = draw();
    while clock < horizon {
        let next_departure = departures.front().copied().unwrap_or(f64::INFINITY);
        let next = next_arrival.min(next_departure).min(horizon);
        let k = departures.len();
        if k >= occupancy_time.len() {
            occupancy_time.resize(k + 1, 0.0);
        }
        occupancy_time[k] += next - clock;
        clock = next;
        if clock >= horizon {
            break;
        }
        if next_departure <= next_arrival {
            departures.pop_front();
        } else {
            departures.push_back(clock + delta);
            next_arrival = clock + draw();
        }
    }
    occupancy_time.iter().map(|&t| t / horizon).collect()
}

/// Total-variation distance between an empirical occupancy histogram and the
/// Poisson(rho) stationary law, including the Poisson tail beyond the
/// histogram's support.
pub fn compare_to_stationary(histogram: &[f64], rho: f64) -> Result<f64, QueueError> {
    let sum: f64 = histogram.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(QueueError::UnnormalizedHistogram { sum });
    }
    let mut distance = 0.0;
    let mut covered = 0.0;
    for (k, &h) in histogram.iter().enumerate() {
        let pi = mg_infty_stationary(rho, k)?;
        distance += (h - pi).abs();
        covered += pi;
    }
    distance += (1.0 - covered).max(0.0);
    Ok(distance / 2.0)
}
