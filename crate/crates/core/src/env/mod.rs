//! Physical model of the STAR-RIS assisted downlink: geometry, channels,
//! path loss, SINR, rate, power projection and reward.

pub mod channel;
pub mod config;
pub mod geometry;
pub mod pathloss;
pub mod reward;
pub mod signal;
pub mod star;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use channel::{draw_channels, gen_bs_ris_channel, gen_rayleigh_channel, steering_vectors, ChannelSet};
pub use config::{Point3, RisMode, SystemConfig};
pub use geometry::{place_users, Geometry, Side, User};
pub use pathloss::{pathloss_los, pathloss_nlos};
pub use reward::{reward, RewardBreakdown};
pub use signal::{project_power, rate, sinr, sinr_all, Precoder};
pub use star::{coupling_residual, star_matrices, StarCoefficients, StarState};

use crate::error::Result;
use crate::scalar::Scalar;

/// Outcome of executing one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub breakdown: RewardBreakdown,
    /// True once the episode has run `episode_len` slots.
    pub done: bool,
}

/// One seeded network instance. Users are resampled per episode and the
/// channels redrawn once per slot.
#[derive(Debug, Clone)]
pub struct Environment<T> {
    cfg: SystemConfig,
    geometry: Geometry,
    channels: ChannelSet<T>,
    rng: ChaCha8Rng,
    slot: usize,
}

impl<T: Scalar> Environment<T> {
    pub fn new(cfg: SystemConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let geometry = place_users(&cfg, &mut rng)?;
        let channels = draw_channels(&cfg, &geometry, &mut rng)?;
        Ok(Self {
            cfg,
            geometry,
            channels,
            rng,
            slot: 0,
        })
    }

    /// Starts a new episode with freshly placed users.
    pub fn reset(&mut self) -> Result<&ChannelSet<T>> {
        self.geometry = place_users(&self.cfg, &mut self.rng)?;
        self.channels = draw_channels(&self.cfg, &self.geometry, &mut self.rng)?;
        self.slot = 0;
        Ok(&self.channels)
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn channels(&self) -> &ChannelSet<T> {
        &self.channels
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    /// Channel-stream state, for purity checks.
    pub fn rng_state(&self) -> &ChaCha8Rng {
        &self.rng
    }

    /// Reward of a configuration on the current channels. Does not advance
    /// the environment or touch its random stream.
    pub fn evaluate(&self, precoder: &Precoder<T>, star: &StarState<T>) -> Result<RewardBreakdown> {
        evaluate(&self.cfg, &self.channels, precoder, star)
    }

    /// Executes a configuration, then draws the channels of the next slot.
    pub fn step(&mut self, precoder: &Precoder<T>, star: &StarState<T>) -> Result<StepOutcome> {
        let breakdown = self.evaluate(precoder, star)?;
        self.slot += 1;
        self.channels = draw_channels(&self.cfg, &self.geometry, &mut self.rng)?;
        Ok(StepOutcome {
            breakdown,
            done: self.slot >= self.cfg.episode_len,
        })
    }
}

/// Rates and reward for one configuration on the given channels.
pub fn evaluate<T: Scalar>(
    cfg: &SystemConfig,
    channels: &ChannelSet<T>,
    precoder: &Precoder<T>,
    star: &StarState<T>,
) -> Result<RewardBreakdown> {
    let coeffs = star_matrices(star, cfg.ris_mode)?;
    let sinrs = sinr_all(precoder, channels, &coeffs, T::lit(cfg.sigma2()))?;
    let bw = T::lit(cfg.bandwidth_hz);
    let rates = sinrs.iter().map(|&g| rate(g, bw)).collect::<Result<Vec<T>>>()?;
    Ok(reward(&rates, precoder, cfg))
}
