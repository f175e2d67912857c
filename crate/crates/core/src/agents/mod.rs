//! Replay buffers, exploration schedules, and the DDPG and DQN agents.

mod ddpg;
mod dqn;
mod exploration;
mod replay;

pub use ddpg::{actor_spec, critic_spec, DdpgAgent, DdpgLosses, Exploration};
pub use dqn::{argmax, q_spec, DqnAgent, DqnPolicy};
pub use exploration::{EpsilonSchedule, OuNoise};
pub use replay::{Action, ContinuousBatch, DiscreteBatch, ReplayBuffer, Transition};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::AdamConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentHyperParams {
    /// Discount factor.
    pub gamma: f64,
    pub tau_ddpg: f64,
    pub tau_dqn: f64,
    pub batch: usize,
    pub buffer: usize,
    pub lr: f64,
    /// Rewards are multiplied by this before entering any TD target.
    pub reward_scale: f64,
    pub actor_hidden: usize,
    pub critic_hidden: [usize; 2],
    pub dqn_hidden: Vec<usize>,
    pub ou_theta: f64,
    pub ou_xi: f64,
    pub ou_xi_min: f64,
    pub ou_decay: f64,
    pub eps0: f64,
    pub eps_min: f64,
    pub eps_decay: f64,
}

impl Default for AgentHyperParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            tau_ddpg: 0.002,
            tau_dqn: 0.003,
            batch: 32,
            buffer: 10_000,
            lr: 3e-4,
            reward_scale: DEFAULT_REWARD_SCALE,
            actor_hidden: 512,
            critic_hidden: [512, 256],
            dqn_hidden: vec![256, 256],
            ou_theta: 0.15,
            ou_xi: 0.2,
            ou_xi_min: 0.01,
            ou_decay: 0.995,
            eps0: 0.9,
            eps_min: 0.05,
            eps_decay: 0.99,
        }
    }
}

pub const DEFAULT_REWARD_SCALE: f64 = 0.005;

impl AgentHyperParams {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            ..AdamConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |field, v: f64, lo_open: bool| {
            let ok = if lo_open { v > 0.0 && v <= 1.0 } else { (0.0..=1.0).contains(&v) };
            if ok {
                Ok(())
            } else {
                Err(Error::config(field, format!("must lie in {}0, 1], got {v}", if lo_open { "(" } else { "[" })))
            }
        };
        unit("gamma", self.gamma, false)?;
        unit("tau_ddpg", self.tau_ddpg, true)?;
        unit("tau_dqn", self.tau_dqn, true)?;
        unit("ou_decay", self.ou_decay, true)?;
        unit("eps_decay", self.eps_decay, true)?;
        unit("eps0", self.eps0, false)?;
        if self.batch == 0 {
            return Err(Error::config("batch", "must be positive"));
        }
        if self.buffer < self.batch {
            return Err(Error::config("buffer", "must hold at least one batch"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::config("lr", "must be positive"));
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return Err(Error::config("reward_scale", "must be positive"));
        }
        if self.actor_hidden == 0 || self.critic_hidden.contains(&0) || self.dqn_hidden.contains(&0) {
            return Err(Error::config("hidden", "layer widths must be positive"));
        }
        if self.dqn_hidden.is_empty() {
            return Err(Error::config("dqn_hidden", "needs at least one hidden layer"));
        }
        if !(self.ou_theta >= 0.0 && self.ou_xi >= 0.0 && self.ou_xi_min >= 0.0) {
            return Err(Error::config("ou", "noise parameters must be non-negative"));
        }
        if !(self.eps_min >= 0.0 && self.eps_min <= self.eps0) {
            return Err(Error::config("eps_min", "must lie in [0, eps0]"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        AgentHyperParams::default().validate().unwrap();
    }

    #[test]
    fn out_of_range_rejected() {
        for bad in [
            AgentHyperParams { gamma: 1.5, ..Default::default() },
            AgentHyperParams { tau_ddpg: 0.0, ..Default::default() },
            AgentHyperParams { buffer: 8, ..Default::default() },
            AgentHyperParams { eps_min: 0.95, ..Default::default() },
            AgentHyperParams { dqn_hidden: vec![], ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
