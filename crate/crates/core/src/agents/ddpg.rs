use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;

use super::exploration::OuNoise;
use super::replay::{ContinuousBatch, ReplayBuffer, Transition};
use super::AgentHyperParams;
use crate::error::Result;
use crate::neural::{adam_step, soft_update, AdamState, LayerSpec, Mode, Network};
use crate::scalar::Scalar;

/// BN, dense + ReLU, BN, dense + tanh.
pub fn actor_spec(state_dim: usize, action_dim: usize, hidden: usize) -> Vec<LayerSpec> {
    vec![
        LayerSpec::batch_norm(state_dim),
        LayerSpec::dense(state_dim, hidden),
        LayerSpec::relu(hidden),
        LayerSpec::batch_norm(hidden),
        LayerSpec::dense(hidden, action_dim),
        LayerSpec::tanh(action_dim),
    ]
}

/// BN on the state, concatenation with the action, two dense + ReLU layers
/// and a linear scalar head.
pub fn critic_spec(state_dim: usize, action_dim: usize, hidden: [usize; 2]) -> Vec<LayerSpec> {
    let [h1, h2] = hidden;
    vec![
        LayerSpec::batch_norm(state_dim),
        LayerSpec::concat(state_dim, action_dim),
        LayerSpec::dense(state_dim + action_dim, h1),
        LayerSpec::relu(h1),
        LayerSpec::dense(h1, h2),
        LayerSpec::relu(h2),
        LayerSpec::dense(h2, 1),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exploration {
    /// Policy output plus OU noise, clipped to [-1, 1].
    Explore,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdpgLosses {
    pub critic_loss: f64,
    /// Mean critic value of the actor's actions before the actor step.
    pub actor_objective: f64,
}

#[derive(Debug, Clone)]
pub struct DdpgAgent<T> {
    pub actor: Network<T>,
    pub actor_target: Network<T>,
    pub critic: Network<T>,
    pub critic_target: Network<T>,
    actor_opt: AdamState<T>,
    critic_opt: AdamState<T>,
    pub noise: OuNoise,
    pub buffer: ReplayBuffer<T, Array1<T>>,
    pub hp: AgentHyperParams,
}

impl<T: Scalar> DdpgAgent<T> {
    /// Targets start as exact copies of the online networks.
    pub fn new<R: Rng + ?Sized>(state_dim: usize, action_dim: usize, hp: &AgentHyperParams, rng: &mut R) -> Result<Self> {
        hp.validate()?;
        let actor = Network::new(actor_spec(state_dim, action_dim, hp.actor_hidden), rng)?;
        let critic = Network::new(critic_spec(state_dim, action_dim, hp.critic_hidden), rng)?;
        Ok(Self {
            actor_opt: AdamState::new(&actor.params, hp.adam()),
            critic_opt: AdamState::new(&critic.params, hp.adam()),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            noise: OuNoise::new(action_dim, hp.ou_theta, hp.ou_xi, hp.ou_xi_min, hp.ou_decay),
            buffer: ReplayBuffer::new(hp.buffer, state_dim, action_dim),
            hp: hp.clone(),
        })
    }

    pub fn state_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.actor.output_dim()
    }

    /// Eval-mode policy output; with [`Exploration::Explore`] the OU process
    /// advances one step.
    pub fn act<R: Rng + ?Sized>(&mut self, s: ArrayView1<T>, mode: Exploration, rng: &mut R) -> Result<Array1<T>> {
        let mu = self.greedy(s)?;
        Ok(match mode {
            Exploration::Greedy => mu,
            Exploration::Explore => {
                let noise = self.noise.next(rng);
                add_clipped(&mu, noise)
            }
        })
    }

    pub fn greedy(&self, s: ArrayView1<T>) -> Result<Array1<T>> {
        let out = self.actor.predict(s.insert_axis(Axis(0)), None)?;
        Ok(out.row(0).to_owned())
    }

    pub fn push(&mut self, t: Transition<T, Array1<T>>) -> Result<()> {
        self.buffer.push(t)
    }

    /// Samples a batch and trains; "not ready" while the buffer is short.
    pub fn train_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<DdpgLosses> {
        let batch = ContinuousBatch::from_transitions(&self.buffer.sample(self.hp.batch, rng)?);
        self.train_on(&batch)
    }

    /// One critic step on the TD targets of the target networks, one actor
    /// step along the critic's action gradient, then soft target updates.
    pub fn train_on(&mut self, b: &ContinuousBatch<T>) -> Result<DdpgLosses> {
        let n = T::lit(b.s.nrows() as f64);
        let next_a = self.actor_target.predict(b.s_next.view(), None)?;
        let next_q = self.critic_target.predict(b.s_next.view(), Some(next_a.view()))?;
        let gamma = T::lit(self.hp.gamma);
        let scale = T::lit(self.hp.reward_scale);
        let y: Array1<T> = ndarray::Zip::from(&b.r)
            .and(&b.done)
            .and(next_q.column(0))
            .map_collect(|&r, &d, &q| r * scale + gamma * (T::one() - d) * q);

        let (q, cache) = self.critic.forward(b.s.view(), Some(b.a.view()), Mode::Train)?;
        let err = &q.column(0) - &y;
        let critic_loss = err.iter().fold(T::zero(), |a, &e| a + e * e) / n;
        let two = T::lit(2.0);
        let dq = err.mapv(|e| two * e / n).insert_axis(Axis(1));
        let g = self.critic.backward(&cache, dq.view())?;
        adam_step(&mut self.critic.params, &g.params, &mut self.critic_opt)?;

        let (a, actor_cache) = self.actor.forward(b.s.view(), None, Mode::Train)?;
        let (qa, critic_cache) = self.critic.forward(b.s.view(), Some(a.view()), Mode::Train)?;
        let objective = qa.sum() / n;
        // Ascend Q: descend -mean(Q).
        let up = Array2::from_elem((qa.nrows(), 1), -T::one() / n);
        let da = self
            .critic
            .backward(&critic_cache, up.view())?
            .aux
            .expect("critic takes the action as auxiliary input");
        let ga = self.actor.backward(&actor_cache, da.view())?;
        adam_step(&mut self.actor.params, &ga.params, &mut self.actor_opt)?;

        let tau = T::lit(self.hp.tau_ddpg);
        soft_update(&mut self.actor_target.params, &self.actor.params, tau)?;
        soft_update(&mut self.critic_target.params, &self.critic.params, tau)?;
        Ok(DdpgLosses {
            critic_loss: critic_loss.to_f64_lossy(),
            actor_objective: objective.to_f64_lossy(),
        })
    }

    pub fn end_episode(&mut self) {
        self.noise.end_episode();
        self.noise.reset();
    }

    /// Per-sample multiplies of one actor forward plus one critic forward.
    pub fn dense_multiplies(&self) -> usize {
        self.actor.dense_multiplies() + self.critic.dense_multiplies()
    }
}

fn add_clipped<T: Scalar>(mu: &Array1<T>, noise: &Array1<f64>) -> Array1<T> {
    ndarray::Zip::from(mu)
        .and(noise)
        .map_collect(|&m, &e| (m + T::lit(e)).max(-T::one()).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> AgentHyperParams {
        AgentHyperParams {
            actor_hidden: 16,
            critic_hidden: [16, 8],
            batch: 4,
            buffer: 64,
            ..AgentHyperParams::default()
        }
    }

    #[test]
    fn greedy_in_range_and_noiseless_explore_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let hp = AgentHyperParams { ou_xi: 0.0, ou_xi_min: 0.0, ..small() };
        let mut agent = DdpgAgent::<f64>::new(3, 2, &hp, &mut rng).unwrap();
        let s = array![100.0, -50.0, 3.0];
        let g = agent.greedy(s.view()).unwrap();
        assert!(g.iter().all(|v| v.abs() <= 1.0));
        assert_eq!(agent.act(s.view(), Exploration::Explore, &mut rng).unwrap(), g);
    }

    #[test]
    fn clipping() {
        let out = add_clipped(&array![0.99f64, -0.2], &array![0.5, -0.1]);
        assert_eq!(out[0], 1.0);
        assert!((out[1] + 0.3).abs() < 1e-15);
    }

    fn fixed_batch(rng: &mut ChaCha8Rng) -> ContinuousBatch<f64> {
        let s = Array2::from_shape_fn((4, 3), |_| rng.random::<f64>());
        ContinuousBatch {
            a: Array2::from_shape_fn((4, 2), |_| rng.random::<f64>() * 2.0 - 1.0),
            r: Array1::from_elem(4, 2.0),
            s_next: s.clone(),
            s,
            done: Array1::zeros(4),
        }
    }

    #[test]
    fn critic_regresses_to_constant_reward() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hp = AgentHyperParams { gamma: 0.0, reward_scale: 1.0, ..small() };
        let mut agent = DdpgAgent::<f64>::new(3, 2, &hp, &mut rng).unwrap();
        let b = fixed_batch(&mut rng);
        let first = agent.train_on(&b).unwrap().critic_loss;
        let mut last = first;
        for _ in 0..200 {
            last = agent.train_on(&b).unwrap().critic_loss;
        }
        assert!(last < first * 0.5, "{first} -> {last}");
    }

    #[test]
    fn first_target_equals_online() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hp = AgentHyperParams { gamma: 1.0, reward_scale: 1.0, ..small() };
        let agent = DdpgAgent::<f64>::new(3, 2, &hp, &mut rng).unwrap();
        assert_eq!(agent.actor_target, agent.actor);
        assert_eq!(agent.critic_target, agent.critic);
        let b = fixed_batch(&mut rng);
        let a = agent.actor.predict(b.s_next.view(), None).unwrap();
        let q_online = agent.critic.predict(b.s_next.view(), Some(a.view())).unwrap();
        let a_t = agent.actor_target.predict(b.s_next.view(), None).unwrap();
        let q_target = agent.critic_target.predict(b.s_next.view(), Some(a_t.view())).unwrap();
        assert_eq!(q_online, q_target);
    }

    #[test]
    fn zero_tau_freezes_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hp = AgentHyperParams { tau_ddpg: 1e-300, ..small() };
        let mut agent = DdpgAgent::<f64>::new(3, 2, &hp, &mut rng).unwrap();
        agent.hp.tau_ddpg = 0.0;
        let before = (agent.actor_target.params.layers.clone(), agent.critic_target.params.layers.clone());
        let b = fixed_batch(&mut rng);
        for _ in 0..5 {
            agent.train_on(&b).unwrap();
        }
        assert_eq!(agent.actor_target.params.layers, before.0);
        assert_eq!(agent.critic_target.params.layers, before.1);
        assert_ne!(agent.actor.params.layers, before.0);
    }

    #[test]
    fn actor_climbs_a_known_critic_surface() {
        // Reward -|a - 0.5|^2 with gamma 0: the policy must move toward 0.5.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let hp = AgentHyperParams { gamma: 0.0, reward_scale: 1.0, lr: 1e-3, ..small() };
        let mut agent = DdpgAgent::<f64>::new(2, 1, &hp, &mut rng).unwrap();
        let s = array![0.3, -0.7];
        for _ in 0..1500 {
            let a = agent.act(s.view(), Exploration::Explore, &mut rng).unwrap();
            let r = -(a[0] - 0.5).powi(2);
            agent.push(Transition { s: s.clone(), a, r, s_next: s.clone(), done: true }).unwrap();
            if agent.buffer.len() >= hp.batch {
                agent.train_step(&mut rng).unwrap();
            }
        }
        let g = agent.greedy(s.view()).unwrap()[0];
        assert!((g - 0.5).abs() < 0.15, "{g}");
    }

    #[test]
    fn underfull_buffer_not_ready() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut agent = DdpgAgent::<f64>::new(3, 2, &small(), &mut rng).unwrap();
        assert!(matches!(agent.train_step(&mut rng), Err(crate::Error::NotReady { .. })));
    }
}
