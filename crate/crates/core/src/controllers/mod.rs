//! Action layouts, state encoding, action decoders and the episode runners
//! of the baseline DDPG, hybrid DDPG and joint DDPG-DQN schemes.

mod codec;
mod runner;

pub use codec::{encode_inner_state, StateCodec};
pub use runner::{
    run_episode_algorithm1, run_episode_algorithm2, EpisodeMetrics, EpisodeOptions, StepRecord, TraceStep,
};

use std::ops::Range;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::env::{project_power, Precoder, StarState, SystemConfig};
use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Scalar};

/// Largest surface the joint scheme accepts: its Q head has `2^N` outputs.
pub const MAX_JOINT_ELEMENTS: usize = 14;

/// Floor on decoded reflection amplitudes; keeps beta inside (0, 1].
pub const BETA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// DDPG with a separate binary branch output per element.
    Baseline,
    /// DDPG with one periodic output per element carrying phase and branch.
    Hybrid,
    /// DDPG for beamformer, phases and amplitudes; DQN for the branches.
    Joint,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Baseline, Scheme::Hybrid, Scheme::Joint];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::Hybrid => "hybrid",
            Scheme::Joint => "joint",
        }
    }
}

/// Named spans of the flat continuous action vector.
///
/// All schemes start with the beamformer span: `2MK` entries holding
/// `(re, im)` of `W[m, k]` at `2 (m K + k)`. Then the reflection phases
/// (or the hybrid span), the amplitudes, and for the baseline the branch
/// outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionLayout {
    pub scheme: Scheme,
    pub antennas: usize,
    pub elements: usize,
    pub users: usize,
    pub w_span: Range<usize>,
    /// Reflection phases; for the hybrid scheme this is the hybrid span.
    pub theta_span: Range<usize>,
    pub beta_span: Range<usize>,
    /// Baseline only.
    pub branch_span: Option<Range<usize>>,
    /// Joint only: `2^N` branch combinations.
    pub dqn_actions: Option<usize>,
}

impl ActionLayout {
    pub fn new(scheme: Scheme, cfg: &SystemConfig) -> Result<Self> {
        let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users());
        if scheme == Scheme::Joint && n > MAX_JOINT_ELEMENTS {
            return Err(Error::config(
                "elements",
                format!("joint scheme enumerates 2^N branch choices; N = {n} exceeds {MAX_JOINT_ELEMENTS}"),
            ));
        }
        let w_span = 0..2 * m * k;
        let theta_span = w_span.end..w_span.end + n;
        let beta_span = theta_span.end..theta_span.end + n;
        let branch_span = (scheme == Scheme::Baseline).then(|| beta_span.end..beta_span.end + n);
        Ok(Self {
            scheme,
            antennas: m,
            elements: n,
            users: k,
            w_span,
            theta_span,
            beta_span,
            branch_span,
            dqn_actions: (scheme == Scheme::Joint).then(|| 1usize << n),
        })
    }

    /// Length of the continuous action vector.
    pub fn continuous_dim(&self) -> usize {
        self.branch_span.as_ref().map_or(self.beta_span.end, |r| r.end)
    }
}

fn check_unit<T: Scalar>(a: ArrayView1<T>) -> Result<()> {
    if let Some(v) = a.iter().find(|v| !(v.abs() <= T::one())) {
        return Err(Error::Domain(format!("action entries must lie in [-1, 1], got {v}")));
    }
    Ok(())
}

fn check_len<T>(a: ArrayView1<T>, layout: &ActionLayout) -> Result<()> {
    if a.len() != layout.continuous_dim() {
        return Err(Error::Shape(format!(
            "action has {} entries, layout expects {}",
            a.len(),
            layout.continuous_dim()
        )));
    }
    Ok(())
}

/// Linear map of the beamformer span onto `+-sqrt(Pmax / K)` per component,
/// then per-antenna power projection.
pub fn decode_precoder<T: Scalar>(a: ArrayView1<T>, layout: &ActionLayout, cfg: &SystemConfig) -> Precoder<T> {
    let (m, k) = (layout.antennas, layout.users);
    let amp = T::lit((cfg.p_max_w / k as f64).sqrt());
    let span = a.slice(ndarray::s![layout.w_span.clone()]);
    let w = Array2::from_shape_fn((m, k), |(i, j)| {
        let at = 2 * (i * k + j);
        Complex::new(span[at] * amp, span[at + 1] * amp)
    });
    project_power(Precoder { w }, cfg)
}

/// `clamp((a + 1) / 2, 1e-3, 1)`.
pub fn decode_beta<T: Scalar>(a: T) -> T {
    let half = T::lit(0.5);
    ((a + T::one()) * half).max(T::lit(BETA_FLOOR)).min(T::one())
}

/// `theta_R +- pi/2`, wrapped; `plus` selects the positive branch.
pub fn transmit_phase<T: Scalar>(theta_r: T, plus: bool) -> T {
    let quarter = T::FRAC_PI_2();
    wrap_angle(if plus { theta_r + quarter } else { theta_r - quarter })
}

fn star_state<T: Scalar>(theta_r: Array1<T>, plus: impl Fn(usize) -> bool, beta: Array1<T>) -> StarState<T> {
    let theta_transmit = Array1::from_shape_fn(theta_r.len(), |i| transmit_phase(theta_r[i], plus(i)));
    StarState {
        theta_reflect: theta_r,
        theta_transmit,
        beta,
    }
}

fn betas<T: Scalar>(a: ArrayView1<T>, layout: &ActionLayout) -> Array1<T> {
    a.slice(ndarray::s![layout.beta_span.clone()]).mapv(decode_beta)
}

/// Baseline: `theta_R = pi a`, branch from the sign of a separate output,
/// with `a = 0` on the minus branch.
pub fn decode_baseline<T: Scalar>(a: ArrayView1<T>, layout: &ActionLayout, cfg: &SystemConfig) -> Result<(Precoder<T>, StarState<T>)> {
    check_len(a, layout)?;
    check_unit(a)?;
    let branch = layout
        .branch_span
        .clone()
        .ok_or_else(|| Error::Shape("layout has no branch span".into()))?;
    let theta = a.slice(ndarray::s![layout.theta_span.clone()]).mapv(|v| wrap_angle(v * T::PI()));
    let d = a.slice(ndarray::s![branch]);
    Ok((decode_precoder(a, layout, cfg), star_state(theta, |i| d[i] > T::zero(), betas(a, layout))))
}

/// Hybrid: `theta_R = wrap(2 pi a)` and the branch from the sign of the
/// same output.
pub fn decode_hybrid<T: Scalar>(a: ArrayView1<T>, layout: &ActionLayout, cfg: &SystemConfig) -> Result<(Precoder<T>, StarState<T>)> {
    check_len(a, layout)?;
    check_unit(a)?;
    let h = a.slice(ndarray::s![layout.theta_span.clone()]);
    let theta = h.mapv(|v| wrap_angle(v * T::TAU()));
    Ok((decode_precoder(a, layout, cfg), star_state(theta, |i| h[i] > T::zero(), betas(a, layout))))
}

/// Joint: continuous spans as in the baseline, branches from the DQN index.
pub fn decode_joint<T: Scalar>(
    a: ArrayView1<T>,
    index: usize,
    layout: &ActionLayout,
    cfg: &SystemConfig,
) -> Result<(Precoder<T>, StarState<T>)> {
    check_len(a, layout)?;
    check_unit(a)?;
    let plus = branches_from_index(index, layout.elements)?;
    let theta = a.slice(ndarray::s![layout.theta_span.clone()]).mapv(|v| wrap_angle(v * T::PI()));
    Ok((decode_precoder(a, layout, cfg), star_state(theta, |i| plus[i], betas(a, layout))))
}

/// Bit `n` of `index` set selects `theta_T = theta_R + pi/2` on element `n`.
pub fn branches_from_index(index: usize, elements: usize) -> Result<Vec<bool>> {
    if elements >= usize::BITS as usize || index >> elements != 0 {
        return Err(Error::Domain(format!("branch index {index} out of range for {elements} elements")));
    }
    Ok((0..elements).map(|n| index >> n & 1 == 1).collect())
}

pub fn index_from_branches(plus: &[bool]) -> usize {
    plus.iter().enumerate().fold(0, |acc, (n, &p)| acc | (usize::from(p) << n))
}

#[cfg(test)]
mod tests;
