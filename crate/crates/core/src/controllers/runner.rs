use ndarray::Array1;
use rand::Rng;

use super::codec::{encode_inner_state, StateCodec};
use super::{decode_baseline, decode_hybrid, decode_joint, ActionLayout, Scheme};
use crate::agents::{DdpgAgent, DqnAgent, DqnPolicy, Exploration, Transition};
use crate::env::{ChannelSet, Environment};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeOptions {
    /// One train step per slot once the buffers hold a batch.
    pub train: bool,
    /// OU noise on the DDPG output and epsilon-greedy inner DQN actions.
    pub explore: bool,
    /// Keep the channels and actions of every slot.
    pub trace: bool,
}

impl EpisodeOptions {
    pub const TRAIN: Self = Self {
        train: true,
        explore: true,
        trace: false,
    };
    pub const EVAL: Self = Self {
        train: false,
        explore: false,
        trace: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub reward: f64,
    pub total_power: f64,
    pub satisfied: usize,
    /// Joint scheme: reward of the inner (exploratory) evaluation.
    pub inner_reward: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TraceStep<T> {
    pub channels: ChannelSet<T>,
    pub action: Array1<T>,
    pub inner_index: Option<usize>,
    pub outer_index: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct EpisodeMetrics<T> {
    pub steps: Vec<StepRecord>,
    pub trace: Vec<TraceStep<T>>,
}

impl<T> EpisodeMetrics<T> {
    fn mean(&self, f: impl Fn(&StepRecord) -> f64) -> f64 {
        self.steps.iter().map(f).sum::<f64>() / self.steps.len().max(1) as f64
    }

    pub fn mean_reward(&self) -> f64 {
        self.mean(|s| s.reward)
    }

    pub fn mean_power(&self) -> f64 {
        self.mean(|s| s.total_power)
    }

    pub fn mean_satisfied(&self) -> f64 {
        self.mean(|s| s.satisfied as f64)
    }
}

fn check_dims<T: Scalar>(agent: &DdpgAgent<T>, layout: &ActionLayout, state_dim: usize) -> Result<()> {
    if agent.action_dim() != layout.continuous_dim() || agent.state_dim() != state_dim {
        return Err(Error::Shape(format!(
            "agent is {} -> {} but the layout needs {state_dim} -> {}",
            agent.state_dim(),
            agent.action_dim(),
            layout.continuous_dim()
        )));
    }
    Ok(())
}

fn mode(explore: bool) -> Exploration {
    if explore {
        Exploration::Explore
    } else {
        Exploration::Greedy
    }
}

/// One episode of the baseline or hybrid scheme: act, decode, execute,
/// store the transition and train once per slot.
pub fn run_episode_algorithm1<T: Scalar, R: Rng + ?Sized>(
    env: &mut Environment<T>,
    agent: &mut DdpgAgent<T>,
    layout: &ActionLayout,
    codec: &StateCodec,
    opts: EpisodeOptions,
    rng: &mut R,
) -> Result<EpisodeMetrics<T>> {
    let decode = match layout.scheme {
        Scheme::Baseline => decode_baseline::<T>,
        Scheme::Hybrid => decode_hybrid::<T>,
        Scheme::Joint => return Err(Error::config("scheme", "the joint scheme runs through run_episode_algorithm2")),
    };
    env.reset()?;
    let mut s = codec.encode(env.channels());
    check_dims(agent, layout, s.len())?;
    let cfg = env.config().clone();
    let mut metrics = EpisodeMetrics {
        steps: Vec::with_capacity(cfg.episode_len),
        trace: Vec::new(),
    };
    loop {
        let a = agent.act(s.view(), mode(opts.explore), rng)?;
        let (w, star) = decode(a.view(), layout, &cfg)?;
        if opts.trace {
            metrics.trace.push(TraceStep {
                channels: env.channels().clone(),
                action: a.clone(),
                inner_index: None,
                outer_index: None,
            });
        }
        let out = env.step(&w, &star)?;
        let s_next = codec.encode(env.channels());
        metrics.steps.push(StepRecord {
            reward: out.breakdown.reward,
            total_power: out.breakdown.total_power,
            satisfied: out.breakdown.satisfied_count,
            inner_reward: None,
        });
        agent.push(Transition {
            s,
            a,
            r: T::lit(out.breakdown.reward),
            s_next: s_next.clone(),
            done: out.done,
        })?;
        if opts.train && agent.buffer.len() >= agent.hp.batch {
            agent.train_step(rng)?;
        }
        s = s_next;
        if out.done {
            return Ok(metrics);
        }
    }
}

/// One episode of the joint scheme.
///
/// Each slot: the DDPG proposes the continuous action, the DQN explores a
/// branch index on the inner state `[s | a_c]` and the inner environment
/// scores it without touching the outer channels or their random stream;
/// the DQN's greedy index then goes to the outer environment. The inner
/// transition completes once the next slot's inner state is known, so
/// both buffers grow by one per slot and the last slot is terminal.
pub fn run_episode_algorithm2<T: Scalar, R: Rng + ?Sized>(
    env: &mut Environment<T>,
    ddpg: &mut DdpgAgent<T>,
    dqn: &mut DqnAgent<T>,
    layout: &ActionLayout,
    codec: &StateCodec,
    opts: EpisodeOptions,
    rng: &mut R,
) -> Result<EpisodeMetrics<T>> {
    if layout.scheme != Scheme::Joint {
        return Err(Error::config("scheme", "run_episode_algorithm2 needs the joint layout"));
    }
    env.reset()?;
    let mut s = codec.encode(env.channels());
    check_dims(ddpg, layout, s.len())?;
    let (sd, ad) = (s.len(), layout.continuous_dim());
    if Some(dqn.actions()) != layout.dqn_actions || dqn.q.input_dim() != sd + ad {
        return Err(Error::Shape("DQN does not match the joint layout".into()));
    }
    let cfg = env.config().clone();
    let mut metrics = EpisodeMetrics {
        steps: Vec::with_capacity(cfg.episode_len),
        trace: Vec::new(),
    };
    let policy = if opts.explore { DqnPolicy::EpsGreedy } else { DqnPolicy::Greedy };
    let mut a_c = ddpg.act(s.view(), mode(opts.explore), rng)?;
    loop {
        let s_inner = encode_inner_state(s.view(), a_c.view(), sd, ad)?;
        let d_inner = dqn.act(s_inner.view(), policy, rng)?;
        let (w, star) = decode_joint(a_c.view(), d_inner, layout, &cfg)?;
        let inner = env.evaluate(&w, &star)?;

        let d_outer = dqn.act(s_inner.view(), DqnPolicy::Greedy, rng)?;
        let (w, star) = decode_joint(a_c.view(), d_outer, layout, &cfg)?;
        if opts.trace {
            metrics.trace.push(TraceStep {
                channels: env.channels().clone(),
                action: a_c.clone(),
                inner_index: Some(d_inner),
                outer_index: Some(d_outer),
            });
        }
        let out = env.step(&w, &star)?;
        let s_next = codec.encode(env.channels());
        metrics.steps.push(StepRecord {
            reward: out.breakdown.reward,
            total_power: out.breakdown.total_power,
            satisfied: out.breakdown.satisfied_count,
            inner_reward: Some(inner.reward),
        });
        ddpg.push(Transition {
            s,
            a: a_c.clone(),
            r: T::lit(out.breakdown.reward),
            s_next: s_next.clone(),
            done: out.done,
        })?;
        if opts.train && ddpg.buffer.len() >= ddpg.hp.batch {
            ddpg.train_step(rng)?;
        }

        let a_next = if out.done {
            None
        } else {
            Some(ddpg.act(s_next.view(), mode(opts.explore), rng)?)
        };
        let s_inner_next = match &a_next {
            Some(a) => encode_inner_state(s_next.view(), a.view(), sd, ad)?,
            None => s_inner.clone(),
        };
        dqn.push(Transition {
            s: s_inner,
            a: d_inner,
            r: T::lit(inner.reward),
            s_next: s_inner_next,
            done: out.done,
        })?;
        if opts.train && dqn.buffer.len() >= dqn.hp.batch {
            dqn.train_step(rng)?;
        }
        match a_next {
            Some(a) => {
                a_c = a;
                s = s_next;
            }
            None => return Ok(metrics),
        }
    }
}
