//! Run configuration and parameter validation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// The four gossip-rate allocation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicyKind {
    /// Every node gossips at a fixed equal share of the capacity.
    Uniform,
    /// Only the most recently source-updated node gossips, at full capacity.
    SemiDistributed,
    /// Each source-updated node gossips at full capacity for a window of
    /// length delta; overlapping windows collide and deliver nothing.
    FullyDistributed,
    /// Frame-based benchmark: the minimum-age nodes at each source
    /// self-update share the capacity equally for the whole frame.
    Asuman,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Uniform,
        PolicyKind::SemiDistributed,
        PolicyKind::FullyDistributed,
        PolicyKind::Asuman,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Uniform => "uniform",
            PolicyKind::SemiDistributed => "semi-distributed",
            PolicyKind::FullyDistributed => "fully-distributed",
            PolicyKind::Asuman => "asuman",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(PolicyKind::Uniform),
            "semi" | "semi-distributed" | "semi_distributed" => Ok(PolicyKind::SemiDistributed),
            "fully" | "fully-distributed" | "fully_distributed" => {
                Ok(PolicyKind::FullyDistributed)
            }
            "asuman" => Ok(PolicyKind::Asuman),
            other => Err(format!(
                "unknown policy '{other}' (expected uniform | semi | fully | asuman)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{field} must be strictly positive and finite")]
    NonPositiveRate { field: &'static str },
    #[error("burn_in ({burn_in}) must be non-negative and smaller than horizon ({horizon})")]
    BurnInExceedsHorizon { burn_in: f64, horizon: f64 },
    #[error("delta is required when policy = fully-distributed")]
    MissingDelta,
}

/// Full parameterization of one simulation run.
///
/// `capacity_b` defaults to `n * lambda` during validation; `delta` is only
/// consumed by the fully-distributed policy.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Number of gossip nodes (>= 1).
    pub n: usize,
    /// Source self-update rate.
    pub lambda_e: f64,
    /// Total source-to-network update rate (split uniformly, lambda/n each).
    pub lambda: f64,
    /// Total instantaneous gossip capacity; `None` means `n * lambda`.
    pub capacity_b: Option<f64>,
    /// Gossip-window length (fully-distributed only).
    pub delta: Option<f64>,
    pub policy: PolicyKind,
    /// Simulated duration.
    pub horizon: f64,
    /// Prefix excluded from time averages; must be < horizon.
    pub burn_in: f64,
    /// Root RNG seed.
    pub seed: u64,
}

impl SimConfig {
    /// Checks every invariant and fills in the default capacity.
    pub fn validate(mut self) -> Result<SimConfig, ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::NonPositiveRate { field: "n" });
        }
        check_positive(self.lambda_e, "lambda_e")?;
        check_positive(self.lambda, "lambda")?;
        check_positive(self.horizon, "horizon")?;
        if let Some(b) = self.capacity_b {
            check_positive(b, "capacity_b")?;
        } else {
            self.capacity_b = Some(self.n as f64 * self.lambda);
        }
        if let Some(d) = self.delta {
            check_positive(d, "delta")?;
        } else if self.policy == PolicyKind::FullyDistributed {
            return Err(ConfigError::MissingDelta);
        }
        if !self.burn_in.is_finite() || self.burn_in < 0.0 || self.burn_in >= self.horizon {
            return Err(ConfigError::BurnInExceedsHorizon {
                burn_in: self.burn_in,
                horizon: self.horizon,
            });
        }
        Ok(self)
    }

    /// Total gossip capacity B. Only meaningful after validation.
    pub fn capacity(&self) -> f64 {
        self.capacity_b.unwrap_or(self.n as f64 * self.lambda)
    }
}

fn check_positive(value: f64, field: &'static str) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::NonPositiveRate { field })
    }
}

/// Free-function form of [`SimConfig::validate`].
pub fn validate_config(cfg: SimConfig) -> Result<SimConfig, ConfigError> {
    cfg.validate()
}
