use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use starbf::{
    compare_algorithms, compare_ris_modes, emit_outputs, load_config, report_complexity, run_training_with,
    save_config, Comparison, ExperimentConfig, Result,
};

#[derive(Parser)]
#[command(version, about = "STAR-RIS beamforming with DDPG and DDPG-DQN controllers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one scheme on one seed.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hybrid scheme under the star, double spliced and reflect-only surfaces.
    CompareRis {
        #[arg(long)]
        config: PathBuf,
        /// Comma separated; defaults to the config's seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Baseline, hybrid and joint schemes on identical seeds.
    CompareAlg {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dense-layer multiplies per decision for each scheme.
    ReportComplexity {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn prepare(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| starbf::Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    save_config(cfg, &out.join("config.json"))
}

fn finish(cmp: &Comparison, out: &Path) -> Result<()> {
    emit_outputs(&cmp.records, out)?;
    print!("{cmp}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            let out = out.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
            cfg.out_dir = Some(out.clone());
            prepare(&cfg, &out)?;
            let rec = run_training_with(&cfg, seed, Some(&out.join("checkpoints")))?;
            emit_outputs(std::slice::from_ref(&rec), &out)?;
            println!(
                "{} seed {seed}: reward {:.2} -> {:.2}, power {:.4} W, {:.1} s",
                rec.label(),
                rec.initial_reward(),
                rec.converged_reward(),
                rec.converged_power(),
                rec.wall_clock_s
            );
        }
        Command::CompareRis { config, seeds, out } => {
            let cfg = load_config(&config)?;
            let seeds = seeds.unwrap_or_else(|| cfg.seeds.clone());
            prepare(&cfg, &out)?;
            finish(&compare_ris_modes(&cfg, &seeds)?, &out)?;
        }
        Command::CompareAlg { config, seeds, out } => {
            let cfg = load_config(&config)?;
            let seeds = seeds.unwrap_or_else(|| cfg.seeds.clone());
            prepare(&cfg, &out)?;
            finish(&compare_algorithms(&cfg, &seeds)?, &out)?;
        }
        Command::ReportComplexity { config } => {
            print!("{}", report_complexity(&load_config(&config)?));
        }
    }
    Ok(())
}
