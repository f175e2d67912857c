use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starbf_core::agents::{AgentHyperParams, DdpgAgent};
use starbf_core::controllers::{run_episode_algorithm1, ActionLayout, EpisodeOptions, Scheme, StateCodec};
use starbf_core::env::{Environment, SystemConfig};
use starbf_core::neural::{Checkpoint, Network};
use starbf_core::{DdpgAgent32, Environment32};

fn small() -> (SystemConfig, AgentHyperParams) {
    let cfg = SystemConfig {
        elements: 4,
        episode_len: 8,
        ..SystemConfig::default()
    };
    let hp = AgentHyperParams {
        actor_hidden: 24,
        critic_hidden: [24, 12],
        batch: 8,
        buffer: 200,
        ..AgentHyperParams::default()
    };
    (cfg, hp)
}

#[test]
fn train_then_restore_actor() {
    let (cfg, hp) = small();
    let layout = ActionLayout::new(Scheme::Hybrid, &cfg).unwrap();
    let codec = StateCodec::from_config(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut agent: DdpgAgent32 = DdpgAgent::new(StateCodec::dim(&cfg), layout.continuous_dim(), &hp, &mut rng).unwrap();
    let mut env: Environment32 = Environment::new(cfg.clone(), 1).unwrap();
    for _ in 0..4 {
        let m = run_episode_algorithm1(&mut env, &mut agent, &layout, &codec, EpisodeOptions::TRAIN, &mut rng).unwrap();
        assert_eq!(m.steps.len(), 8);
        assert!(m.steps.iter().all(|s| s.reward.is_finite() && s.total_power <= 4.0 * cfg.p_max_w + 1e-9));
        agent.end_episode();
    }
    assert!(agent.actor.params.is_finite() && agent.critic.params.is_finite());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("actor.json");
    agent.actor.checkpoint().save(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    let mut fresh = Network::<f32>::new(loaded.spec.clone(), &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
    fresh.restore(&loaded).unwrap();
    let s = Array2::from_shape_fn((3, StateCodec::dim(&cfg)), |(i, j)| ((i * 7 + j) as f32 * 0.1).sin());
    assert_eq!(fresh.predict(s.view(), None).unwrap(), agent.actor.predict(s.view(), None).unwrap());

    // Greedy evaluation after training leaves the agent untouched.
    let before = agent.actor.params.clone();
    run_episode_algorithm1(&mut env, &mut agent, &layout, &codec, EpisodeOptions::EVAL, &mut rng).unwrap();
    assert_eq!(agent.actor.params, before);
}

#[test]
fn f32_and_f64_environments_agree() {
    let (cfg, _) = small();
    let a = Environment::<f32>::new(cfg.clone(), 5).unwrap();
    let b = Environment::<f64>::new(cfg, 5).unwrap();
    let (ca, cb) = (a.channels(), b.channels());
    for (x, y) in ca.matrices().iter().zip(cb.matrices()) {
        for (p, q) in x.iter().zip(y.iter()) {
            assert!((p.re as f64 - q.re).abs() <= 1e-5 * q.norm().max(1e-30));
        }
    }
}
