//! Simulation and learning core for STAR-RIS assisted multi-user MISO
//! downlink beamforming.
//!
//! * [`env`]: coupled phase-shift surface model, channels, SINR and reward.
//! * [`neural`]: dense network engine with batch normalization and Adam.
//! * [`agents`]: replay, exploration noise, DDPG and DQN agents.
//! * [`controllers`]: action layouts, decoders and the episode runners of the
//!   baseline, hybrid and joint schemes.
//!
//! Everything numeric is generic over [`Scalar`]; [`f32`] is the training
//! precision and [`f64`] the verification precision.

pub mod agents;
pub mod controllers;
pub mod env;
pub mod error;
pub mod neural;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{wrap_angle, Scalar};

/// Training precision.
pub type Real = f32;

pub type Environment32 = env::Environment<f32>;
pub type Environment64 = env::Environment<f64>;
pub type Network32 = neural::Network<f32>;
pub type Network64 = neural::Network<f64>;
pub type DdpgAgent32 = agents::DdpgAgent<f32>;
pub type DqnAgent32 = agents::DqnAgent<f32>;
