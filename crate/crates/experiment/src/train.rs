use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use starbf_core::agents::{DdpgAgent, DqnAgent};
use starbf_core::controllers::{
    run_episode_algorithm1, run_episode_algorithm2, ActionLayout, EpisodeOptions, Scheme, StateCodec,
};
use starbf_core::env::{Environment, RisMode};
use starbf_core::Real;

use crate::complexity::scheme_complexity;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Per-episode metrics of one (config, seed) training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scheme: Scheme,
    pub ris_mode: RisMode,
    pub elements: usize,
    pub seed: u64,
    /// Mean per-slot reward of each episode.
    pub rewards: Vec<f64>,
    /// Mean total transmit power of each episode, watts.
    pub powers: Vec<f64>,
    /// Mean satisfied-user count of each episode.
    pub satisfied: Vec<f64>,
    pub wall_clock_s: f64,
    pub actor_params: usize,
    pub critic_params: usize,
    pub dqn_params: Option<usize>,
    /// Dense-layer multiplies of one decision (per sample).
    pub multiplies_per_step: usize,
}

/// Mean of the trailing tenth (at least one entry).
pub fn tail_mean(v: &[f64]) -> f64 {
    let n = (v.len() / 10).max(1).min(v.len());
    v[v.len() - n..].iter().sum::<f64>() / n.max(1) as f64
}

/// Mean of the leading tenth (at least one entry).
pub fn head_mean(v: &[f64]) -> f64 {
    let n = (v.len() / 10).max(1).min(v.len());
    v[..n].iter().sum::<f64>() / n.max(1) as f64
}

impl RunRecord {
    pub fn episodes(&self) -> usize {
        self.rewards.len()
    }

    pub fn label(&self) -> String {
        format!("{}/{}/N={}", self.scheme.name(), self.ris_mode.name(), self.elements)
    }

    pub fn converged_reward(&self) -> f64 {
        tail_mean(&self.rewards)
    }

    pub fn initial_reward(&self) -> f64 {
        head_mean(&self.rewards)
    }

    pub fn converged_power(&self) -> f64 {
        tail_mean(&self.powers)
    }

    pub fn converged_satisfied(&self) -> f64 {
        tail_mean(&self.satisfied)
    }
}

pub fn run_training(cfg: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    run_training_with(cfg, seed, None)
}

/// Trains `cfg.scheme` for `cfg.episodes` episodes. Users are re-placed at
/// every episode start; exploration decays once per episode. With
/// `checkpoint_dir` set, the trained networks are written there at the end.
///
/// The environment draws from stream 0 of `seed` and the agents from
/// stream 1, so every scheme trained on one seed sees the same channels.
pub fn run_training_with(cfg: &ExperimentConfig, seed: u64, checkpoint_dir: Option<&Path>) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let sys = &cfg.system;
    let layout = ActionLayout::new(cfg.scheme, sys)?;
    let codec = StateCodec::from_config(sys)?;
    let state_dim = StateCodec::dim(sys);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut env = Environment::<Real>::new(sys.clone(), seed)?;
    let mut ddpg = DdpgAgent::<Real>::new(state_dim, layout.continuous_dim(), &cfg.agent, &mut rng)?;
    let mut dqn = match layout.dqn_actions {
        Some(n) => Some(DqnAgent::<Real>::new(state_dim + layout.continuous_dim(), n, &cfg.agent, &mut rng)?),
        None => None,
    };

    let mut rec = RunRecord {
        scheme: cfg.scheme,
        ris_mode: sys.ris_mode,
        elements: sys.elements,
        seed,
        rewards: Vec::with_capacity(cfg.episodes),
        powers: Vec::with_capacity(cfg.episodes),
        satisfied: Vec::with_capacity(cfg.episodes),
        wall_clock_s: 0.0,
        actor_params: ddpg.actor.parameter_count(),
        critic_params: ddpg.critic.parameter_count(),
        dqn_params: dqn.as_ref().map(|q| q.q.parameter_count()),
        multiplies_per_step: scheme_complexity(cfg.scheme, sys, &cfg.agent)?.total,
    };
    for _ in 0..cfg.episodes {
        let m = match &mut dqn {
            None => run_episode_algorithm1(&mut env, &mut ddpg, &layout, &codec, EpisodeOptions::TRAIN, &mut rng)?,
            Some(q) => {
                let m = run_episode_algorithm2(&mut env, &mut ddpg, q, &layout, &codec, EpisodeOptions::TRAIN, &mut rng)?;
                q.end_episode();
                m
            }
        };
        ddpg.end_episode();
        rec.rewards.push(m.mean_reward());
        rec.powers.push(m.mean_power());
        rec.satisfied.push(m.mean_satisfied());
    }

    if let Some(dir) = checkpoint_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        ddpg.actor.checkpoint().save(&dir.join("actor.json"))?;
        ddpg.critic.checkpoint().save(&dir.join("critic.json"))?;
        if let Some(q) = &dqn {
            q.q.checkpoint().save(&dir.join("dqn.json"))?;
        }
    }
    rec.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenths() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(head_mean(&v), 1.5);
        assert_eq!(tail_mean(&v), 19.5);
        assert_eq!(tail_mean(&[4.0]), 4.0);
        assert_eq!(head_mean(&[1.0, 2.0, 3.0]), 1.0);
    }

    proptest::proptest! {
        #[test]
        fn tenths_lie_within_the_series(v in proptest::collection::vec(-1e3f64..1e3, 1..200)) {
            let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            for m in [head_mean(&v), tail_mean(&v)] {
                proptest::prop_assert!(m >= lo - 1e-9 && m <= hi + 1e-9);
            }
            let rev: Vec<f64> = v.iter().rev().copied().collect();
            proptest::prop_assert!((head_mean(&v) - tail_mean(&rev)).abs() <= 1e-9);
        }
    }
}
