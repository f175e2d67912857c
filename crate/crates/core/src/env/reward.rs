use serde::{Deserialize, Serialize};

use super::config::SystemConfig;
use super::signal::Precoder;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// bit/s, one per user.
    pub per_user_rates: Vec<f64>,
    /// Users whose rate strictly exceeds the QoS floor.
    pub satisfied_count: usize,
    /// Watts.
    pub total_power: f64,
    pub reward: f64,
}

/// Per-slot reward: `reward_hit` per satisfied user minus
/// `reward_power * sum_k ||w_k||^2`.
pub fn reward<T: Scalar>(rates: &[T], precoder: &Precoder<T>, cfg: &SystemConfig) -> RewardBreakdown {
    let per_user_rates: Vec<f64> = rates.iter().map(|r| r.to_f64_lossy()).collect();
    let satisfied_count = per_user_rates.iter().filter(|&&r| r > cfg.rate_qos_bps).count();
    let total_power = precoder.total_power().to_f64_lossy();
    RewardBreakdown {
        reward: satisfied_count as f64 * cfg.reward_hit - cfg.reward_power * total_power,
        per_user_rates,
        satisfied_count,
        total_power,
    }
}
