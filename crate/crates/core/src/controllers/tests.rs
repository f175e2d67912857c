use super::*;
use crate::agents::{AgentHyperParams, DdpgAgent, DqnAgent};
use crate::env::{evaluate, ChannelSet, Environment, RisMode};
use ndarray::Array1;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

fn defaults() -> SystemConfig {
    SystemConfig::default()
}

fn small_cfg() -> SystemConfig {
    SystemConfig {
        elements: 4,
        episode_len: 6,
        ..SystemConfig::default()
    }
}

fn small_hp() -> AgentHyperParams {
    AgentHyperParams {
        actor_hidden: 16,
        critic_hidden: [16, 8],
        dqn_hidden: vec![16],
        batch: 4,
        buffer: 100,
        ..AgentHyperParams::default()
    }
}

#[test]
fn layout_dimensions() {
    let cfg = defaults();
    let (mk2, n) = (2 * 4 * 4, 12);
    let b = ActionLayout::new(Scheme::Baseline, &cfg).unwrap();
    let h = ActionLayout::new(Scheme::Hybrid, &cfg).unwrap();
    let j = ActionLayout::new(Scheme::Joint, &cfg).unwrap();
    assert_eq!(b.continuous_dim(), mk2 + 3 * n);
    assert_eq!(h.continuous_dim(), mk2 + 2 * n);
    assert_eq!(j.continuous_dim(), mk2 + 2 * n);
    assert_eq!(j.dqn_actions, Some(4096));
    assert_eq!(h.continuous_dim(), b.continuous_dim() - n);
    // Phase outputs: N hybrid entries against N continuous plus N discrete.
    assert_eq!(2 * h.theta_span.len(), b.theta_span.len() + b.branch_span.unwrap().len());
    let big = SystemConfig { elements: 16, ..defaults() };
    assert!(ActionLayout::new(Scheme::Joint, &big).is_err());
    assert!(ActionLayout::new(Scheme::Hybrid, &big).is_ok());
}

#[test]
fn state_encoding() {
    let cfg = defaults();
    let zero = ChannelSet::<f64>::zeros(&cfg);
    let codec = StateCodec::from_config(&cfg).unwrap();
    let s = codec.encode(&zero);
    assert_eq!(s.len(), 224);
    assert_eq!(StateCodec::dim(&cfg), 224);
    assert!(s.iter().all(|&v| v == 0.0));

    let env = Environment::<f64>::new(cfg.clone(), 3).unwrap();
    let one = codec.encode(env.channels());
    let two = StateCodec { scale: 2.0, ..codec.clone() }.encode(env.channels());
    assert!(one.iter().zip(&two).all(|(a, b)| *b == 2.0 * a));
    // Unit-scale blocks after normalization.
    let rms = (one.iter().map(|v| v * v).sum::<f64>() / one.len() as f64).sqrt();
    assert!(rms > 0.2 && rms < 5.0, "{rms}");

    let plain = StateCodec::unit().encode(env.channels());
    let h = &env.channels().bs_ris;
    assert_eq!(plain[0], h[[0, 0]].re);
    assert_eq!(plain[1], h[[0, 1]].re);
    assert_eq!(plain[h.len()], h[[0, 0]].im);
}

#[test]
fn inner_state_concatenation() {
    let s = Array1::from_shape_fn(224, |i| i as f64);
    let a = Array1::zeros(56);
    let inner = encode_inner_state(s.view(), a.view(), 224, 56).unwrap();
    assert_eq!(inner.len(), 280);
    assert_eq!(inner.slice(ndarray::s![..224]), s);
    assert!(inner.slice(ndarray::s![224..]).iter().all(|&v| v == 0.0));
    assert!(encode_inner_state(s.view(), a.view(), 224, 57).is_err());
}

fn action(layout: &ActionLayout, fill: impl Fn(usize) -> f64) -> Array1<f64> {
    Array1::from_shape_fn(layout.continuous_dim(), fill)
}

#[test]
fn baseline_examples() {
    let cfg = defaults();
    let layout = ActionLayout::new(Scheme::Baseline, &cfg).unwrap();
    let branch = layout.branch_span.clone().unwrap();
    let mut a = action(&layout, |_| 0.0);
    a[layout.theta_span.start] = 0.5;
    a[layout.beta_span.start] = -1.0;
    a[layout.beta_span.start + 1] = 0.2;
    a[branch.start + 1] = 0.3;
    let (_, s) = decode_baseline(a.view(), &layout, &cfg).unwrap();
    assert!((s.theta_reflect[0] - FRAC_PI_2).abs() < 1e-15);
    assert!((s.theta_transmit[0] - 0.0).abs() < 1e-15);
    assert!((s.theta_transmit[1] - FRAC_PI_2).abs() < 1e-15);
    assert_eq!(s.beta[0], 1e-3);
    assert!((s.beta[1] - 0.6).abs() < 1e-15);
    assert!(s.max_residual() < 1e-12);
    a[0] = 1.5;
    assert!(decode_baseline(a.view(), &layout, &cfg).is_err());
}

#[test]
fn hybrid_examples() {
    let cfg = defaults();
    let layout = ActionLayout::new(Scheme::Hybrid, &cfg).unwrap();
    let mut a = action(&layout, |_| 0.0);
    let t = layout.theta_span.start;
    a[t] = 0.25;
    a[t + 1] = 0.0;
    a[t + 2] = -0.75;
    let (_, s) = decode_hybrid(a.view(), &layout, &cfg).unwrap();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * y.abs().max(1.0);
    assert!(close(s.theta_reflect[0], FRAC_PI_2) && close(s.theta_transmit[0], PI));
    assert!(close(s.theta_reflect[1], 0.0) && close(s.theta_transmit[1], -FRAC_PI_2));
    assert!(close(s.theta_reflect[2], FRAC_PI_2) && close(s.theta_transmit[2], 0.0));
    assert!(decode_hybrid(action(&layout, |_| f64::NAN).view(), &layout, &cfg).is_err());
}

#[test]
fn branch_index_codec() {
    assert_eq!(branches_from_index(0, 4).unwrap(), vec![false; 4]);
    assert_eq!(branches_from_index(15, 4).unwrap(), vec![true; 4]);
    for idx in 0..16 {
        assert_eq!(index_from_branches(&branches_from_index(idx, 4).unwrap()), idx);
    }
    assert!(branches_from_index(16, 4).is_err());
}

#[test]
fn joint_branches_follow_index() {
    let cfg = small_cfg();
    let layout = ActionLayout::new(Scheme::Joint, &cfg).unwrap();
    let a = action(&layout, |i| ((i * 37 % 11) as f64 / 5.0 - 1.0).clamp(-1.0, 1.0));
    let (_, s) = decode_joint(a.view(), 0b0101, &layout, &cfg).unwrap();
    for n in 0..4 {
        let expected = transmit_phase(s.theta_reflect[n], n % 2 == 0);
        assert_eq!(s.theta_transmit[n], expected);
    }
    assert!(decode_joint(a.view(), 16, &layout, &cfg).is_err());
}

fn random_action(len: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    Array1::from_shape_fn(len, |_| match rng.random_range(0..20) {
        0 => -1.0,
        1 => 1.0,
        2 => 0.0,
        _ => rng.random_range(-1.0..=1.0),
    })
}

proptest! {
    #[test]
    fn decoded_configurations_are_feasible(seed in any::<u64>()) {
        let cfg = defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for scheme in Scheme::ALL {
            let layout = ActionLayout::new(scheme, &SystemConfig { elements: 8, ..cfg.clone() }).unwrap();
            let cfg = SystemConfig { elements: 8, ..cfg.clone() };
            let a = random_action(layout.continuous_dim(), &mut rng);
            let (w, s) = match scheme {
                Scheme::Baseline => decode_baseline(a.view(), &layout, &cfg).unwrap(),
                Scheme::Hybrid => decode_hybrid(a.view(), &layout, &cfg).unwrap(),
                Scheme::Joint => decode_joint(a.view(), rng.random_range(0..256), &layout, &cfg).unwrap(),
            };
            prop_assert!(s.max_residual() <= 1e-9);
            prop_assert!(w.row_powers().iter().all(|&p| p <= cfg.p_max_w * (1.0 + 1e-12)));
            prop_assert!(s.beta.iter().all(|&b| b > 0.0 && b <= 1.0));
            for th in s.theta_reflect.iter().chain(&s.theta_transmit) {
                prop_assert!(*th > -PI && *th <= PI);
            }
        }
    }

    #[test]
    fn baseline_and_hybrid_share_w_and_beta(seed in any::<u64>()) {
        let cfg = defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hl = ActionLayout::new(Scheme::Hybrid, &cfg).unwrap();
        let bl = ActionLayout::new(Scheme::Baseline, &cfg).unwrap();
        let ah = random_action(hl.continuous_dim(), &mut rng);
        let mut ab = random_action(bl.continuous_dim(), &mut rng);
        ab.slice_mut(ndarray::s![..hl.continuous_dim()]).assign(&ah);
        let (wh, sh) = decode_hybrid(ah.view(), &hl, &cfg).unwrap();
        let (wb, sb) = decode_baseline(ab.view(), &bl, &cfg).unwrap();
        prop_assert_eq!(wh, wb);
        prop_assert_eq!(sh.beta, sb.beta);
    }
}

fn ddpg_for(cfg: &SystemConfig, layout: &ActionLayout, hp: &AgentHyperParams, seed: u64) -> DdpgAgent<f64> {
    DdpgAgent::new(StateCodec::dim(cfg), layout.continuous_dim(), hp, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn algorithm1_pushes_one_transition_per_slot_and_rewards_recompute() {
    let cfg = small_cfg();
    let codec = StateCodec::from_config(&cfg).unwrap();
    for scheme in [Scheme::Baseline, Scheme::Hybrid] {
        let layout = ActionLayout::new(scheme, &cfg).unwrap();
        let mut agent = ddpg_for(&cfg, &layout, &small_hp(), 1);
        let mut env = Environment::<f64>::new(cfg.clone(), 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let opts = EpisodeOptions { trace: true, ..EpisodeOptions::TRAIN };
        let m = run_episode_algorithm1(&mut env, &mut agent, &layout, &codec, opts, &mut rng).unwrap();
        assert_eq!(m.steps.len(), cfg.episode_len);
        assert_eq!(agent.buffer.len(), cfg.episode_len);
        for ((t, step), stored) in m.trace.iter().zip(&m.steps).zip(agent.buffer.items()) {
            let (w, s) = match scheme {
                Scheme::Baseline => decode_baseline(t.action.view(), &layout, &cfg).unwrap(),
                _ => decode_hybrid(t.action.view(), &layout, &cfg).unwrap(),
            };
            let r = evaluate(&cfg, &t.channels, &w, &s).unwrap().reward;
            assert_eq!(r, step.reward);
            assert_eq!(stored.r, r);
            assert_eq!(stored.a, t.action);
        }
        assert!(agent.buffer.items().last().unwrap().done);
    }
}

#[test]
fn algorithm1_is_deterministic_without_training_or_noise() {
    let cfg = small_cfg();
    let codec = StateCodec::from_config(&cfg).unwrap();
    let layout = ActionLayout::new(Scheme::Hybrid, &cfg).unwrap();
    let hp = AgentHyperParams { ou_xi: 0.0, ou_xi_min: 0.0, ..small_hp() };
    let run = || {
        let mut agent = ddpg_for(&cfg, &layout, &hp, 4);
        let mut env = Environment::<f64>::new(cfg.clone(), 5).unwrap();
        let opts = EpisodeOptions { train: false, explore: true, trace: false };
        let m = run_episode_algorithm1(&mut env, &mut agent, &layout, &codec, opts, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        m.steps.iter().map(|s| s.reward).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

fn joint_agents(cfg: &SystemConfig, layout: &ActionLayout, hp: &AgentHyperParams) -> (DdpgAgent<f64>, DqnAgent<f64>) {
    let sd = StateCodec::dim(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ddpg = DdpgAgent::new(sd, layout.continuous_dim(), hp, &mut rng).unwrap();
    let dqn = DqnAgent::new(sd + layout.continuous_dim(), layout.dqn_actions.unwrap(), hp, &mut rng).unwrap();
    (ddpg, dqn)
}

#[test]
fn algorithm2_accounting() {
    let cfg = small_cfg();
    let codec = StateCodec::from_config(&cfg).unwrap();
    let layout = ActionLayout::new(Scheme::Joint, &cfg).unwrap();
    let (mut ddpg, mut dqn) = joint_agents(&cfg, &layout, &small_hp());
    let mut env = Environment::<f64>::new(cfg.clone(), 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let opts = EpisodeOptions { trace: true, ..EpisodeOptions::TRAIN };
    for episode in 1..=3 {
        let m = run_episode_algorithm2(&mut env, &mut ddpg, &mut dqn, &layout, &codec, opts, &mut rng).unwrap();
        assert_eq!(m.steps.len(), cfg.episode_len);
        assert_eq!(ddpg.buffer.len(), episode * cfg.episode_len);
        assert_eq!(dqn.buffer.len(), ddpg.buffer.len());
        for (t, step) in m.trace.iter().zip(&m.steps) {
            let (w, s) = decode_joint(t.action.view(), t.outer_index.unwrap(), &layout, &cfg).unwrap();
            assert_eq!(evaluate(&cfg, &t.channels, &w, &s).unwrap().reward, step.reward);
            let (w, s) = decode_joint(t.action.view(), t.inner_index.unwrap(), &layout, &cfg).unwrap();
            assert_eq!(evaluate(&cfg, &t.channels, &w, &s).unwrap().reward, step.inner_reward.unwrap());
        }
    }
    let dones = dqn.buffer.items().iter().filter(|t| t.done).count();
    assert_eq!(dones, 3);
}

#[test]
fn algorithm2_zero_epsilon_agrees() {
    let cfg = small_cfg();
    let codec = StateCodec::from_config(&cfg).unwrap();
    let layout = ActionLayout::new(Scheme::Joint, &cfg).unwrap();
    let hp = AgentHyperParams { eps0: 0.0, eps_min: 0.0, ..small_hp() };
    let (mut ddpg, mut dqn) = joint_agents(&cfg, &layout, &hp);
    let mut env = Environment::<f64>::new(cfg.clone(), 14).unwrap();
    let opts = EpisodeOptions { trace: true, ..EpisodeOptions::TRAIN };
    let m = run_episode_algorithm2(&mut env, &mut ddpg, &mut dqn, &layout, &codec, opts, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    for (t, step) in m.trace.iter().zip(&m.steps) {
        assert_eq!(t.inner_index, t.outer_index);
        assert_eq!(step.inner_reward, Some(step.reward));
    }
}

#[test]
fn inner_evaluation_is_pure() {
    let cfg = small_cfg();
    let layout = ActionLayout::new(Scheme::Joint, &cfg).unwrap();
    let env = Environment::<f64>::new(cfg.clone(), 15).unwrap();
    let before = (env.rng_state().clone(), env.channels().clone(), env.slot());
    let a = action(&layout, |i| (i as f64 * 0.37).sin());
    for idx in 0..16 {
        let (w, s) = decode_joint(a.view(), idx, &layout, &cfg).unwrap();
        env.evaluate(&w, &s).unwrap();
    }
    assert_eq!(env.rng_state(), &before.0);
    assert_eq!(env.channels(), &before.1);
    assert_eq!(env.slot(), before.2);
}

#[test]
fn every_mode_runs() {
    for mode in RisMode::ALL {
        let cfg = SystemConfig { ris_mode: mode, ..small_cfg() };
        let codec = StateCodec::from_config(&cfg).unwrap();
        let layout = ActionLayout::new(Scheme::Hybrid, &cfg).unwrap();
        let mut agent = ddpg_for(&cfg, &layout, &small_hp(), 3);
        let mut env = Environment::<f64>::new(cfg.clone(), 3).unwrap();
        let m = run_episode_algorithm1(&mut env, &mut agent, &layout, &codec, EpisodeOptions::TRAIN, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(m.mean_reward().is_finite());
    }
}
