use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use starbf_core::controllers::Scheme;
use starbf_core::env::RisMode;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::train::{run_training, RunRecord};

/// Worker count: `STARBF_THREADS` when set to a positive integer, otherwise
/// the available parallelism.
pub fn thread_cap() -> usize {
    std::env::var("STARBF_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Trains every `(config, seed)` job on a pool of [`thread_cap`] workers.
/// Records come back in job order.
pub fn run_many(jobs: &[(ExperimentConfig, u64)]) -> Result<Vec<RunRecord>> {
    for (cfg, _) in jobs {
        cfg.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap())
        .build()
        .map_err(|e| Error::Pool(e.to_string()))?;
    pool.install(|| jobs.par_iter().map(|(cfg, seed)| run_training(cfg, *seed)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Scheme or surface-mode name.
    pub variant: String,
    pub seed: u64,
    pub converged_reward: f64,
    pub converged_power: f64,
    pub converged_satisfied: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub records: Vec<RunRecord>,
}

impl Comparison {
    fn new(variants: Vec<String>, records: Vec<RunRecord>) -> Self {
        let rows = variants
            .into_iter()
            .zip(&records)
            .map(|(variant, r)| ComparisonRow {
                variant,
                seed: r.seed,
                converged_reward: r.converged_reward(),
                converged_power: r.converged_power(),
                converged_satisfied: r.converged_satisfied(),
            })
            .collect();
        Self { rows, records }
    }

    /// Converged reward of `variant` on `seed`.
    pub fn reward(&self, variant: &str, seed: u64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.seed == seed)
            .map(|r| r.converged_reward)
    }

    /// Per variant: mean and sample standard deviation of the converged
    /// reward and power across seeds.
    pub fn dispersion(&self) -> Vec<(String, [f64; 4])> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.variant.as_str()) {
                names.push(&r.variant);
            }
        }
        names
            .into_iter()
            .map(|name| {
                let rows: Vec<&ComparisonRow> = self.rows.iter().filter(|r| r.variant == name).collect();
                let (mr, sr) = mean_std(rows.iter().map(|r| r.converged_reward));
                let (mp, sp) = mean_std(rows.iter().map(|r| r.converged_power));
                (name.to_string(), [mr, sr, mp, sp])
            })
            .collect()
    }
}

fn mean_std(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = v.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<16} {:>6} {:>12} {:>10} {:>10}", "variant", "seed", "reward", "power_w", "satisfied")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<16} {:>6} {:>12.2} {:>10.4} {:>10.3}",
                r.variant, r.seed, r.converged_reward, r.converged_power, r.converged_satisfied
            )?;
        }
        writeln!(f)?;
        writeln!(f, "{:<16} {:>12} {:>10} {:>10} {:>10}", "variant", "reward", "+-", "power_w", "+-")?;
        for (name, [mr, sr, mp, sp]) in self.dispersion() {
            writeln!(f, "{name:<16} {mr:>12.2} {sr:>10.2} {mp:>10.4} {sp:>10.4}")?;
        }
        Ok(())
    }
}

fn check_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.len() < 3 {
        return Err(Error::config("seeds", "comparisons need at least 3 seeds"));
    }
    Ok(())
}

/// Hybrid scheme under each surface mode, on identical seeds.
pub fn compare_ris_modes(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Comparison> {
    check_seeds(seeds)?;
    let mut jobs = Vec::new();
    let mut names = Vec::new();
    for mode in RisMode::ALL {
        for &seed in seeds {
            let mut c = cfg.clone();
            c.scheme = Scheme::Hybrid;
            c.system.ris_mode = mode;
            jobs.push((c, seed));
            names.push(mode.name().to_string());
        }
    }
    Ok(Comparison::new(names, run_many(&jobs)?))
}

/// Baseline, hybrid and joint schemes on identical seeds and systems.
pub fn compare_algorithms(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Comparison> {
    check_seeds(seeds)?;
    let mut jobs = Vec::new();
    let mut names = Vec::new();
    for scheme in Scheme::ALL {
        for &seed in seeds {
            let mut c = cfg.clone();
            c.scheme = scheme;
            jobs.push((c, seed));
            names.push(scheme.name().to_string());
        }
    }
    Ok(Comparison::new(names, run_many(&jobs)?))
}
