use serde::{Deserialize, Serialize};
use starbf_core::agents::{actor_spec, critic_spec, q_spec, AgentHyperParams};
use starbf_core::controllers::{ActionLayout, Scheme, StateCodec};
use starbf_core::env::SystemConfig;
use starbf_core::neural::dense_multiplies;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Sum over dense layers of `in * out` for each network of a scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeComplexity {
    pub scheme: Scheme,
    pub actor: usize,
    pub critic: usize,
    pub dqn: Option<usize>,
    /// Actor plus critic.
    pub ddpg: usize,
    /// `ddpg`, plus three DQN passes per slot for the joint scheme.
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub rows: Vec<SchemeComplexity>,
    /// Schemes the configuration cannot build, with the reason.
    pub skipped: Vec<(Scheme, String)>,
}

pub fn scheme_complexity(scheme: Scheme, sys: &SystemConfig, hp: &AgentHyperParams) -> Result<SchemeComplexity> {
    let layout = ActionLayout::new(scheme, sys)?;
    let (sd, ad) = (StateCodec::dim(sys), layout.continuous_dim());
    let actor = dense_multiplies(&actor_spec(sd, ad, hp.actor_hidden));
    let critic = dense_multiplies(&critic_spec(sd, ad, hp.critic_hidden));
    let dqn = layout
        .dqn_actions
        .map(|n| dense_multiplies(&q_spec(sd + ad, &hp.dqn_hidden, n)));
    let ddpg = actor + critic;
    Ok(SchemeComplexity {
        scheme,
        actor,
        critic,
        dqn,
        ddpg,
        total: ddpg + 3 * dqn.unwrap_or(0),
    })
}

/// Per-scheme multiply counts at the configured widths.
pub fn report_complexity(cfg: &ExperimentConfig) -> ComplexityReport {
    let mut report = ComplexityReport {
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for scheme in Scheme::ALL {
        match scheme_complexity(scheme, &cfg.system, &cfg.agent) {
            Ok(row) => report.rows.push(row),
            Err(e) => report.skipped.push((scheme, e.to_string())),
        }
    }
    report
}

impl std::fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<10} {:>12} {:>12} {:>12} {:>14}", "scheme", "actor", "critic", "dqn", "total")?;
        for r in &self.rows {
            let dqn = r.dqn.map_or("-".to_string(), |d| d.to_string());
            writeln!(f, "{:<10} {:>12} {:>12} {:>12} {:>14}", r.scheme.name(), r.actor, r.critic, dqn, r.total)?;
        }
        for (s, why) in &self.skipped {
            writeln!(f, "{:<10} skipped: {why}", s.name())?;
        }
        Ok(())
    }
}
