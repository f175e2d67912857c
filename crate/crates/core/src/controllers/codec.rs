use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::env::pathloss::{db_to_gain, pathloss_los, pathloss_nlos};
use crate::env::{ChannelSet, SystemConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Flattens the five channel matrices into the agent state: for each of
/// `H_br, H_bR, H_bT, H_rR, H_rT`, the real parts row-major then the
/// imaginary parts, multiplied by `scale * gains[block]`.
///
/// The per-block gains undo the mean path loss of each link at a reference
/// geometry fixed by the configuration, so every block enters the networks
/// at unit scale while per-episode distance variations stay visible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateCodec {
    pub scale: f64,
    pub gains: [f64; 5],
}

impl StateCodec {
    pub fn unit() -> Self {
        Self {
            scale: 1.0,
            gains: [1.0; 5],
        }
    }

    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        let fc = cfg.carrier_ghz;
        let z = cfg.ris_pos.z;
        let d_br = cfg.bs_pos.distance(&cfg.ris_pos);
        // Root-mean-square user offset of an area-uniform disc.
        let horizontal = cfg.user_region_radius_m / 2f64.sqrt();
        let d_ru = (horizontal.powi(2) + (cfg.ris_pos.z - cfg.user_height_m).powi(2)).sqrt();
        let inv = |db: f64| 1.0 / db_to_gain(db).sqrt();
        let br = inv(pathloss_los(d_br, fc)?);
        let bu = inv(pathloss_nlos(d_br, fc, z)?);
        let ru = inv(pathloss_nlos(d_ru, fc, z)?);
        Ok(Self {
            scale: 1.0,
            gains: [br, bu, bu, ru, ru],
        })
    }

    /// `2 (MN + MU + MI + NU + NI)`.
    pub fn dim(cfg: &SystemConfig) -> usize {
        let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users());
        2 * (m * n + m * k + n * k)
    }

    pub fn encode<T: Scalar>(&self, ch: &ChannelSet<T>) -> Array1<T> {
        let mut out = Vec::with_capacity(ch.matrices().iter().map(|m| 2 * m.len()).sum());
        for (mat, g) in ch.matrices().into_iter().zip(self.gains) {
            let g = T::lit(self.scale * g);
            out.extend(mat.iter().map(|z| z.re * g));
            out.extend(mat.iter().map(|z| z.im * g));
        }
        Array1::from(out)
    }
}

/// `[s_outer | a_c]`.
pub fn encode_inner_state<T: Scalar>(s_outer: ArrayView1<T>, a_c: ArrayView1<T>, state_dim: usize, action_dim: usize) -> Result<Array1<T>> {
    if s_outer.len() != state_dim || a_c.len() != action_dim {
        return Err(Error::Shape(format!(
            "inner state needs {state_dim} + {action_dim} entries, got {} + {}",
            s_outer.len(),
            a_c.len()
        )));
    }
    Ok(ndarray::concatenate![ndarray::Axis(0), s_outer, a_c])
}
