use ndarray::{Array2, ArrayView1, Axis};
use rand::Rng;

use super::exploration::EpsilonSchedule;
use super::replay::{DiscreteBatch, ReplayBuffer, Transition};
use super::AgentHyperParams;
use crate::error::Result;
use crate::neural::{adam_step, soft_update, AdamState, LayerSpec, Mode, Network};
use crate::scalar::Scalar;

/// Dense + ReLU hidden layers and a linear head with one output per action.
pub fn q_spec(input_dim: usize, hidden: &[usize], actions: usize) -> Vec<LayerSpec> {
    let mut spec = Vec::new();
    let mut width = input_dim;
    for &h in hidden {
        spec.push(LayerSpec::dense(width, h));
        spec.push(LayerSpec::relu(h));
        width = h;
    }
    spec.push(LayerSpec::dense(width, actions));
    spec
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax<T: Scalar>(values: ArrayView1<T>) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DqnPolicy {
    EpsGreedy,
    Greedy,
}

#[derive(Debug, Clone)]
pub struct DqnAgent<T> {
    pub q: Network<T>,
    pub q_target: Network<T>,
    opt: AdamState<T>,
    pub epsilon: EpsilonSchedule,
    pub buffer: ReplayBuffer<T, usize>,
    pub hp: AgentHyperParams,
}

impl<T: Scalar> DqnAgent<T> {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, actions: usize, hp: &AgentHyperParams, rng: &mut R) -> Result<Self> {
        hp.validate()?;
        let q = Network::new(q_spec(state_dim, &hp.dqn_hidden, actions), rng)?;
        Ok(Self {
            opt: AdamState::new(&q.params, hp.adam()),
            q_target: q.clone(),
            q,
            epsilon: EpsilonSchedule::new(hp.eps0, hp.eps_min, hp.eps_decay),
            buffer: ReplayBuffer::new(hp.buffer, state_dim, actions),
            hp: hp.clone(),
        })
    }

    pub fn actions(&self) -> usize {
        self.q.output_dim()
    }

    pub fn q_values(&self, s: ArrayView1<T>) -> Result<ndarray::Array1<T>> {
        Ok(self.q.predict(s.insert_axis(Axis(0)), None)?.row(0).to_owned())
    }

    /// Epsilon-greedy with the schedule's current epsilon, or pure argmax.
    pub fn act<R: Rng + ?Sized>(&self, s: ArrayView1<T>, policy: DqnPolicy, rng: &mut R) -> Result<usize> {
        self.act_with(s, self.epsilon.value(), policy, rng)
    }

    pub fn act_with<R: Rng + ?Sized>(&self, s: ArrayView1<T>, eps: f64, policy: DqnPolicy, rng: &mut R) -> Result<usize> {
        if policy == DqnPolicy::EpsGreedy && rng.random::<f64>() < eps {
            return Ok(rng.random_range(0..self.actions()));
        }
        Ok(argmax(self.q_values(s)?.view()))
    }

    pub fn push(&mut self, t: Transition<T, usize>) -> Result<()> {
        self.buffer.push(t)
    }

    pub fn train_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        let batch = DiscreteBatch::from_transitions(&self.buffer.sample(self.hp.batch, rng)?);
        self.train_on(&batch)
    }

    /// One Adam step on the squared TD error at the taken actions, then a
    /// soft target update. Returns the loss before the step.
    pub fn train_on(&mut self, b: &DiscreteBatch<T>) -> Result<f64> {
        let n = T::lit(b.s.nrows() as f64);
        let next = self.q_target.predict(b.s_next.view(), None)?;
        let gamma = T::lit(self.hp.gamma);
        let scale = T::lit(self.hp.reward_scale);
        let (q, cache) = self.q.forward(b.s.view(), None, Mode::Train)?;
        let mut grad = Array2::zeros(q.raw_dim());
        let mut loss = T::zero();
        for i in 0..q.nrows() {
            let best = next.row(i)[argmax(next.row(i))];
            let y = b.r[i] * scale + gamma * (T::one() - b.done[i]) * best;
            let e = q[[i, b.a[i]]] - y;
            loss = loss + e * e;
            grad[[i, b.a[i]]] = T::lit(2.0) * e / n;
        }
        let g = self.q.backward(&cache, grad.view())?;
        adam_step(&mut self.q.params, &g.params, &mut self.opt)?;
        soft_update(&mut self.q_target.params, &self.q.params, T::lit(self.hp.tau_dqn))?;
        Ok((loss / n).to_f64_lossy())
    }

    pub fn end_episode(&mut self) {
        self.epsilon.end_episode();
    }

    pub fn dense_multiplies(&self) -> usize {
        self.q.dense_multiplies()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> AgentHyperParams {
        AgentHyperParams {
            dqn_hidden: vec![16, 16],
            batch: 8,
            buffer: 256,
            ..AgentHyperParams::default()
        }
    }

    #[test]
    fn argmax_ties_and_scaling() {
        assert_eq!(argmax(array![1.0, 3.0, 3.0, 2.0].view()), 1);
        assert_eq!(argmax(array![0.0, 0.0].view()), 0);
        let v = array![0.3, -1.0, 0.9, 0.1];
        for c in [0.01, 1.0, 250.0] {
            assert_eq!(argmax((&v * c).view()), 2);
        }
    }

    #[test]
    fn greedy_invariant_to_positive_head_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut agent = DqnAgent::<f64>::new(3, 8, &small(), &mut rng).unwrap();
        let s = array![0.2, -0.4, 1.0];
        let before = agent.act(s.view(), DqnPolicy::Greedy, &mut rng).unwrap();
        let last = agent.q.params.layers.len() - 1;
        if let crate::neural::LayerParams::Dense { w, b } = &mut agent.q.params.layers[last] {
            w.mapv_inplace(|x| x * 7.5);
            b.mapv_inplace(|x| x * 7.5);
        }
        assert_eq!(agent.act(s.view(), DqnPolicy::Greedy, &mut rng).unwrap(), before);
    }

    #[test]
    fn epsilon_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let agent = DqnAgent::<f64>::new(2, 4, &small(), &mut rng).unwrap();
        let s = array![0.5, 0.5];
        let g = agent.act_with(s.view(), 0.0, DqnPolicy::Greedy, &mut rng).unwrap();
        for _ in 0..20 {
            assert_eq!(agent.act_with(s.view(), 0.0, DqnPolicy::EpsGreedy, &mut rng).unwrap(), g);
        }
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            counts[agent.act_with(s.view(), 1.0, DqnPolicy::EpsGreedy, &mut rng).unwrap()] += 1;
        }
        assert!(counts.iter().all(|&c| (2300..=2700).contains(&c)), "{counts:?}");
    }

    fn single(s: &Array1<f64>, a: usize, r: f64) -> DiscreteBatch<f64> {
        let t = Transition { s: s.clone(), a, r, s_next: s.clone(), done: false };
        DiscreteBatch::from_transitions(&[&t])
    }

    #[test]
    fn fixed_point_regression() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hp = AgentHyperParams { gamma: 0.0, reward_scale: 1.0, lr: 1e-3, ..small() };
        let mut agent = DqnAgent::<f64>::new(2, 3, &hp, &mut rng).unwrap();
        let s = array![0.4, -0.1];
        let b = single(&s, 1, 0.75);
        for _ in 0..500 {
            assert!(agent.train_on(&b).unwrap() >= 0.0);
        }
        assert!((agent.q_values(s.view()).unwrap()[1] - 0.75).abs() < 1e-2);
    }

    #[test]
    fn unit_tau_copies_online() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hp = AgentHyperParams { tau_dqn: 1.0, ..small() };
        let mut agent = DqnAgent::<f64>::new(2, 3, &hp, &mut rng).unwrap();
        agent.train_on(&single(&array![1.0, 2.0], 0, 1.0)).unwrap();
        assert_eq!(agent.q_target.params.layers, agent.q.params.layers);
    }

    #[test]
    fn bandit_converges_to_best_arm() {
        let rewards = [0.1, 0.4, 1.0, 0.3, 0.0, 0.6];
        let mut wins = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let hp = AgentHyperParams { gamma: 0.0, reward_scale: 1.0, ..small() };
            let mut agent = DqnAgent::<f64>::new(3, rewards.len(), &hp, &mut rng).unwrap();
            let s = array![1.0, -0.5, 0.25];
            for _ in 0..2000 {
                let a = agent.act_with(s.view(), 0.3, DqnPolicy::EpsGreedy, &mut rng).unwrap();
                let noise = rng.random::<f64>() * 0.2 - 0.1;
                agent
                    .push(Transition { s: s.clone(), a, r: rewards[a] + noise, s_next: s.clone(), done: true })
                    .unwrap();
                if agent.buffer.len() >= hp.batch {
                    agent.train_step(&mut rng).unwrap();
                }
            }
            if agent.act(s.view(), DqnPolicy::Greedy, &mut rng).unwrap() == 2 {
                wins += 1;
            }
        }
        assert!(wins >= 9, "{wins}/10");
    }
}
