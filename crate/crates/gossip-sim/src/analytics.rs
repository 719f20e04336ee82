//! Closed-form mean-age predictors, asymptotes and the symmetric-policy
//! lower bound.
//!
//! Conventions: `n = 1` networks have no neighbors, so the gossip term is
//! taken as zero and the mean age reduces to `n * lambda_e / lambda` (pure
//! source-update renewal). All functions are pure.

use thiserror::Error;

use crate::config::PolicyKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("rho must be non-negative, got {0}")]
    NegativeRho(f64),
    #[error("predictor is undefined at n = {0} (needs n >= 2)")]
    DivisionDomain(usize),
}

/// Mean steady-state age of an individual node under semi-distributed
/// gossiping:
/// `(lambda_e + B/(n-1) * lambda_e/lambda) / (lambda/n + B/(n-1))`.
pub fn semi_distributed_mean_age(n: usize, lambda_e: f64, lambda: f64, capacity: f64) -> f64 {
    if n <= 1 || capacity <= 0.0 {
        return n as f64 * lambda_e / lambda;
    }
    let gossip = capacity / (n - 1) as f64;
    (lambda_e + gossip * lambda_e / lambda) / (lambda / n as f64 + gossip)
}

/// Large-n limit of the semi-distributed mean age at B = n * lambda.
pub fn semi_distributed_asymptote(lambda_e: f64, lambda: f64) -> f64 {
    2.0 * lambda_e / lambda
}

/// Minimum achievable mean age for any symmetric policy whose instantaneous
/// gossip rate never exceeds B; coincides with the semi-distributed value.
pub fn lower_bound(n: usize, lambda_e: f64, lambda: f64, capacity: f64) -> f64 {
    semi_distributed_mean_age(n, lambda_e, lambda, capacity)
}

/// Stationary probability of k customers in an M/G/inf queue with load rho:
/// Poisson, `rho^k e^{-rho} / k!`.
pub fn mg_infty_stationary(rho: f64, k: usize) -> Result<f64, AnalyticsError> {
    if rho.is_nan() || rho < 0.0 {
        return Err(AnalyticsError::NegativeRho(rho));
    }
    let mut p = (-rho).exp();
    for i in 1..=k {
        p *= rho / i as f64;
    }
    Ok(p)
}

/// Capacity discounted by the probability that exactly one node gossips:
/// `lambda * delta * e^{-lambda delta} * B`.
pub fn effective_gossip_rate(lambda: f64, delta: f64, capacity: f64) -> f64 {
    let rho = lambda * delta;
    rho * (-rho).exp() * capacity
}

/// Fully-distributed mean age: the semi-distributed expression with the
/// capacity replaced by the effective gossip rate.
pub fn fully_distributed_mean_age(
    n: usize,
    lambda_e: f64,
    lambda: f64,
    capacity: f64,
    delta: f64,
) -> f64 {
    semi_distributed_mean_age(n, lambda_e, lambda, effective_gossip_rate(lambda, delta, capacity))
}

/// Large-n limit of the fully-distributed mean age at B = n * lambda:
/// `(lambda_e/lambda) * (1 + 1/(lambda delta e^{-lambda delta}))`.
pub fn fully_distributed_asymptote(lambda_e: f64, lambda: f64, delta: f64) -> f64 {
    let rho = lambda * delta;
    (lambda_e / lambda) * (1.0 + 1.0 / (rho * (-rho).exp()))
}

/// Window length maximizing the effective gossip rate: `1/lambda`.
pub fn optimal_delta(lambda: f64) -> f64 {
    1.0 / lambda
}

/// Finite-n ASUMAN mean-age expression (pre-limit form):
/// `(lambda_e/lambda) * (1 + n/(n-1) * (1 + lambda/lambda_e)) / (1/n + n/(n-1))`.
pub fn asuman_mean_age(n: usize, lambda_e: f64, lambda: f64) -> Result<f64, AnalyticsError> {
    if n < 2 {
        return Err(AnalyticsError::DivisionDomain(n));
    }
    let ratio = n as f64 / (n - 1) as f64;
    let numerator = 1.0 + ratio * (1.0 + lambda / lambda_e);
    let denominator = 1.0 / n as f64 + ratio;
    Ok((lambda_e / lambda) * numerator / denominator)
}

/// Large-n ASUMAN limit: `2 lambda_e / lambda + 1`.
pub fn asuman_asymptote(lambda_e: f64, lambda: f64) -> f64 {
    2.0 * lambda_e / lambda + 1.0
}

/// Steady-state expectation of the network minimum age: `lambda_e / lambda`.
pub fn min_age_limit(lambda_e: f64, lambda: f64) -> f64 {
    lambda_e / lambda
}

/// Closed-form mean-age prediction for one policy at given parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryPrediction {
    pub policy: PolicyKind,
    /// Predicted mean node age at finite n.
    pub mean_age: f64,
    /// n -> infinity limit at B = n * lambda.
    pub asymptote: f64,
    pub n: usize,
    pub lambda_e: f64,
    pub lambda: f64,
    pub capacity: f64,
    pub delta: Option<f64>,
}

/// Predictions for one policy, or `None` for the uniform baseline, whose
/// mean age has no closed form here (it grows with log n and is used only
/// for qualitative contrast).
pub fn predict(
    policy: PolicyKind,
    n: usize,
    lambda_e: f64,
    lambda: f64,
    capacity: f64,
    delta: Option<f64>,
) -> Option<TheoryPrediction> {
    let (mean_age, asymptote) = match policy {
        PolicyKind::Uniform => return None,
        PolicyKind::SemiDistributed => (
            semi_distributed_mean_age(n, lambda_e, lambda, capacity),
            semi_distributed_asymptote(lambda_e, lambda),
        ),
        PolicyKind::FullyDistributed => {
            let d = delta.unwrap_or_else(|| optimal_delta(lambda));
            (
                fully_distributed_mean_age(n, lambda_e, lambda, capacity, d),
                fully_distributed_asymptote(lambda_e, lambda, d),
            )
        }
        PolicyKind::Asuman => (
            asuman_mean_age(n, lambda_e, lambda).ok()?,
            asuman_asymptote(lambda_e, lambda),
        ),
    };
    Some(TheoryPrediction {
        policy,
        mean_age,
        asymptote,
        n,
        lambda_e,
        lambda,
        capacity,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use rand::Rng;
    use std::f64::consts::E;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn semi_distributed_known_values() {
        assert!(close(
            semi_distributed_mean_age(5, 1.0, 1.0, 5.0),
            1.5517241379310345,
            1e-12
        ));
        assert!(close(
            semi_distributed_mean_age(100, 1.0, 1.0, 100.0),
            1.9704921279334588,
            1e-12
        ));
        // no neighbors: pure source-update renewal
        assert_eq!(semi_distributed_mean_age(1, 1.0, 1.0, 0.0), 1.0);
        // large n at B = n*lambda approaches 2 lambda_e / lambda
        let near_limit = semi_distributed_mean_age(2_000_000, 1.0, 1.0, 2_000_000.0);
        assert!(close(near_limit, semi_distributed_asymptote(1.0, 1.0), 1e-5));
    }

    #[test]
    fn semi_distributed_asymptote_scales_with_the_rate_ratio() {
        assert_eq!(semi_distributed_asymptote(0.4, 1.0), 0.8);
        assert_eq!(semi_distributed_asymptote(1.0, 1.0), 2.0);
        assert_eq!(semi_distributed_asymptote(2.0, 1.0), 4.0);
    }

    #[test]
    fn lower_bound_coincides_with_semi_distributed() {
        let mut rng = trial_rng(7, 0);
        for _ in 0..200 {
            let n = rng.random_range(2..500);
            let lambda_e = rng.random_range(0.1..5.0);
            let lambda = rng.random_range(0.1..5.0);
            let b = rng.random_range(0.5..2.0) * n as f64 * lambda;
            assert_eq!(
                lower_bound(n, lambda_e, lambda, b),
                semi_distributed_mean_age(n, lambda_e, lambda, b)
            );
        }
        assert!(close(lower_bound(100, 1.0, 1.0, 100.0), 1.9704921279334588, 1e-12));
    }

    #[test]
    fn stationary_law_known_values() {
        assert_eq!(mg_infty_stationary(0.0, 0).unwrap(), 1.0);
        assert!(close(
            mg_infty_stationary(1.0, 1).unwrap(),
            (-1.0f64).exp(),
            1e-12
        ));
        assert!(mg_infty_stationary(-0.5, 0).is_err());
    }

    #[test]
    fn stationary_law_normalizes() {
        let total: f64 = (0..=50).map(|k| mg_infty_stationary(2.0, k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effective_rate_known_values() {
        assert!(close(effective_gossip_rate(1.0, 1.0, 100.0), 100.0 / E, 1e-12));
        // too short a window leaves no time to gossip
        assert!(effective_gossip_rate(1.0, 1e-9, 100.0) < 1e-6);
        // too long a window drowns in interference
        assert!(close(
            effective_gossip_rate(1.0, 10.0, 100.0),
            0.04539992976248486,
            1e-12
        ));
    }

    #[test]
    fn fully_distributed_known_values() {
        assert!(close(
            fully_distributed_mean_age(100, 1.0, 1.0, 100.0, 1.0),
            3.5943709296642607,
            1e-12
        ));
        assert!(close(
            fully_distributed_asymptote(1.0, 1.0, 1.0),
            1.0 + E,
            1e-12
        ));
        assert!(close(
            fully_distributed_asymptote(0.4, 1.0, 1.0),
            0.4 * (1.0 + E),
            1e-12
        ));
        // gossip-free limit: a huge window sends the effective rate to zero
        let starved = fully_distributed_mean_age(50, 1.0, 1.0, 50.0, 1e4);
        assert!(close(starved, 50.0, 1e-9));
    }

    #[test]
    fn optimal_delta_is_the_reciprocal_rate() {
        assert_eq!(optimal_delta(1.0), 1.0);
        assert_eq!(optimal_delta(2.0), 0.5);
    }

    #[test]
    fn optimal_delta_matches_grid_argmin_of_the_asymptote() {
        for lambda in [0.5, 1.0, 2.0] {
            let mut best = (f64::MAX, 0.0);
            let mut d = 0.05 / lambda;
            while d < 10.0 / lambda {
                let age = fully_distributed_asymptote(1.0, lambda, d);
                if age < best.0 {
                    best = (age, d);
                }
                d += 0.001 / lambda;
            }
            assert!(
                (best.1 - optimal_delta(lambda)).abs() < 0.002 / lambda,
                "argmin {} vs 1/lambda {}",
                best.1,
                optimal_delta(lambda)
            );
        }
    }

    #[test]
    fn asuman_known_values() {
        assert_eq!(asuman_asymptote(1.0, 1.0), 3.0);
        assert_eq!(asuman_asymptote(0.4, 1.0), 1.8);
        assert!(close(
            asuman_mean_age(100, 1.0, 1.0).unwrap(),
            2.9606891771462522,
            1e-12
        ));
        assert_eq!(
            asuman_mean_age(1, 1.0, 1.0),
            Err(AnalyticsError::DivisionDomain(1))
        );
    }

    #[test]
    fn asymptote_ordering_favors_semi_distributed() {
        let mut rng = trial_rng(8, 0);
        for _ in 0..500 {
            let lambda_e = rng.random_range(0.01..10.0);
            let lambda = rng.random_range(0.01..10.0);
            let semi = semi_distributed_asymptote(lambda_e, lambda);
            let fully = fully_distributed_asymptote(lambda_e, lambda, optimal_delta(lambda));
            let asuman = asuman_asymptote(lambda_e, lambda);
            assert!(semi < fully && semi < asuman);
            // crossover between the other two sits exactly at 1/(e-1)
            let ratio = lambda_e / lambda;
            if ratio < 1.0 / (E - 1.0) {
                assert!(fully < asuman, "ratio {ratio}");
            } else if ratio > 1.0 / (E - 1.0) {
                assert!(asuman < fully, "ratio {ratio}");
            }
        }
    }

    #[test]
    fn semi_distributed_monotonicity() {
        let mut rng = trial_rng(9, 0);
        for _ in 0..300 {
            let n = rng.random_range(2..1000);
            let lambda_e = rng.random_range(0.1..4.0);
            let lambda = rng.random_range(0.1..4.0);
            let b = rng.random_range(1.0..500.0);
            // strictly decreasing in capacity
            assert!(
                semi_distributed_mean_age(n, lambda_e, lambda, b * 1.1)
                    < semi_distributed_mean_age(n, lambda_e, lambda, b)
            );
            // increasing in the self-update rate
            assert!(
                semi_distributed_mean_age(n, lambda_e * 1.1, lambda, b)
                    > semi_distributed_mean_age(n, lambda_e, lambda, b)
            );
            // interference can never beat the uncontended optimum
            let delta = rng.random_range(0.05..5.0);
            assert!(
                fully_distributed_mean_age(n, lambda_e, lambda, b, delta)
                    >= semi_distributed_mean_age(n, lambda_e, lambda, b)
            );
        }
    }

    #[test]
    fn predictions_respect_the_global_floors() {
        let mut rng = trial_rng(10, 0);
        for _ in 0..300 {
            let n = rng.random_range(2..400);
            let lambda_e = rng.random_range(0.1..4.0);
            let lambda = rng.random_range(0.1..4.0);
            let b = n as f64 * lambda;
            let delta = rng.random_range(0.1..4.0);
            for policy in PolicyKind::ALL {
                let Some(p) = predict(policy, n, lambda_e, lambda, b, Some(delta)) else {
                    assert_eq!(policy, PolicyKind::Uniform);
                    continue;
                };
                // nobody beats the expected minimum age...
                assert!(p.mean_age >= min_age_limit(lambda_e, lambda) - 1e-12);
                // ...nor the symmetric-policy bound
                assert!(p.mean_age >= lower_bound(n, lambda_e, lambda, b) - 1e-9);
            }
        }
    }
}
