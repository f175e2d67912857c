use ndarray::{Array1, Array2};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::channel::ChannelSet;
use super::config::SystemConfig;
use super::star::{star_matrices, StarCoefficients, StarState};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Active beamforming matrix, M x K; column `k` serves user `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Precoder<T> {
    #[serde(with = "super::channel::complex_matrix")]
    pub w: Array2<Complex<T>>,
}

impl<T: Scalar> Precoder<T> {
    pub fn zeros(antennas: usize, users: usize) -> Self {
        Self {
            w: Array2::zeros((antennas, users)),
        }
    }

    /// Sum over users of `||w_k||^2`, watts.
    pub fn total_power(&self) -> T {
        self.w.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Transmit power of each antenna row.
    pub fn row_powers(&self) -> Array1<T> {
        self.w
            .rows()
            .into_iter()
            .map(|r| r.iter().fold(T::zero(), |a, z| a + z.norm_sqr()))
            .collect()
    }
}

/// Scales every antenna row above `p_max_w` back onto the budget.
pub fn project_power<T: Scalar>(mut precoder: Precoder<T>, cfg: &SystemConfig) -> Precoder<T> {
    let p_max = T::lit(cfg.p_max_w);
    for mut row in precoder.w.rows_mut() {
        let power = row.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        if power > p_max {
            let scale = (p_max / power).sqrt();
            row.mapv_inplace(|z| z * scale);
            // Rounding can leave the row a few ulps above the budget.
            let shrink = T::one() - T::epsilon() * T::lit(4.0);
            while row.iter().fold(T::zero(), |a, z| a + z.norm_sqr()) > p_max {
                row.mapv_inplace(|z| z * shrink);
            }
        }
    }
    precoder
}

/// `h_b,k + h_r,k^T Theta H_br^T` for user `k`, with the reflection diagonal
/// for reflect-side users and the transmission diagonal otherwise.
pub fn effective_channel<T: Scalar>(
    k: usize,
    channels: &ChannelSet<T>,
    coeffs: &StarCoefficients<T>,
) -> Array1<Complex<T>> {
    let theta = if k < channels.bs_reflect.ncols() {
        &coeffs.reflect
    } else {
        &coeffs.transmit
    };
    let h_r = channels.from_ris(k);
    // Cascade weight per element, then project through the BS-surface link.
    let weights: Array1<Complex<T>> = h_r.iter().zip(theta.iter()).map(|(a, b)| *a * *b).collect();
    let mut eff = channels.direct(k).to_owned();
    for (m, row) in channels.bs_ris.rows().into_iter().enumerate() {
        let acc = row
            .iter()
            .zip(weights.iter())
            .fold(Complex::new(T::zero(), T::zero()), |a, (h, w)| a + *h * *w);
        eff[m] = eff[m] + acc;
    }
    eff
}

/// Linear SINR of every user for precomputed surface coefficients.
pub fn sinr_all<T: Scalar>(
    precoder: &Precoder<T>,
    channels: &ChannelSet<T>,
    coeffs: &StarCoefficients<T>,
    sigma2: T,
) -> Result<Array1<T>> {
    if !(sigma2 > T::zero()) {
        return Err(Error::Domain(format!("noise power must be positive, got {sigma2}")));
    }
    let k_users = channels.users();
    if precoder.w.ncols() != k_users || precoder.w.nrows() != channels.bs_ris.nrows() {
        return Err(Error::Shape(format!(
            "precoder {:?} does not match {} antennas x {k_users} users",
            precoder.w.dim(),
            channels.bs_ris.nrows()
        )));
    }
    let mut out = Array1::zeros(k_users);
    for k in 0..k_users {
        let h = effective_channel(k, channels, coeffs);
        let mut signal = T::zero();
        let mut interference = T::zero();
        for (j, col) in precoder.w.columns().into_iter().enumerate() {
            let g = h
                .iter()
                .zip(col.iter())
                .fold(Complex::new(T::zero(), T::zero()), |a, (x, y)| a + *x * *y)
                .norm_sqr();
            if j == k {
                signal = g;
            } else {
                interference = interference + g;
            }
        }
        out[k] = signal / (interference + sigma2);
    }
    Ok(out)
}

/// Linear SINR of user `k`.
pub fn sinr<T: Scalar>(
    k: usize,
    precoder: &Precoder<T>,
    channels: &ChannelSet<T>,
    star: &StarState<T>,
    cfg: &SystemConfig,
) -> Result<T> {
    if k >= channels.users() {
        return Err(Error::Shape(format!("user {k} out of range")));
    }
    let coeffs = star_matrices(star, cfg.ris_mode)?;
    Ok(sinr_all(precoder, channels, &coeffs, T::lit(cfg.sigma2()))?[k])
}

/// Achievable rate `B log2(1 + sinr)` in bit/s.
pub fn rate<T: Scalar>(sinr: T, bandwidth_hz: T) -> Result<T> {
    if !(sinr >= T::zero()) {
        return Err(Error::Domain(format!("sinr must be non-negative, got {sinr}")));
    }
    Ok(bandwidth_hz * sinr.ln_1p() / T::LN_2())
}
