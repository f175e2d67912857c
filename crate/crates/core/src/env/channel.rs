use ndarray::{s, Array1, Array2};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::{Point3, SystemConfig};
use super::geometry::Geometry;
use super::pathloss::{db_to_gain, pathloss_los, pathloss_nlos};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The five channel matrices of one time slot, amplitude gains including
/// path loss. `bs_ris` is stored antenna-major (M x N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ChannelSet<T> {
    #[serde(with = "complex_matrix")]
    pub bs_ris: Array2<Complex<T>>,
    #[serde(with = "complex_matrix")]
    pub bs_reflect: Array2<Complex<T>>,
    #[serde(with = "complex_matrix")]
    pub bs_transmit: Array2<Complex<T>>,
    #[serde(with = "complex_matrix")]
    pub ris_reflect: Array2<Complex<T>>,
    #[serde(with = "complex_matrix")]
    pub ris_transmit: Array2<Complex<T>>,
}

impl<T: Scalar> ChannelSet<T> {
    pub fn zeros(cfg: &SystemConfig) -> Self {
        let (m, n, u, i) = (cfg.antennas, cfg.elements, cfg.reflect_users, cfg.transmit_users);
        Self {
            bs_ris: Array2::zeros((m, n)),
            bs_reflect: Array2::zeros((m, u)),
            bs_transmit: Array2::zeros((m, i)),
            ris_reflect: Array2::zeros((n, u)),
            ris_transmit: Array2::zeros((n, i)),
        }
    }

    pub fn matrices(&self) -> [&Array2<Complex<T>>; 5] {
        [
            &self.bs_ris,
            &self.bs_reflect,
            &self.bs_transmit,
            &self.ris_reflect,
            &self.ris_transmit,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.matrices()
            .iter()
            .all(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Direct BS channel of user `k` (reflect users first).
    pub fn direct(&self, k: usize) -> ndarray::ArrayView1<'_, Complex<T>> {
        let u = self.bs_reflect.ncols();
        if k < u {
            self.bs_reflect.column(k)
        } else {
            self.bs_transmit.column(k - u)
        }
    }

    /// Surface-to-user channel of user `k`.
    pub fn from_ris(&self, k: usize) -> ndarray::ArrayView1<'_, Complex<T>> {
        let u = self.ris_reflect.ncols();
        if k < u {
            self.ris_reflect.column(k)
        } else {
            self.ris_transmit.column(k - u)
        }
    }

    pub fn users(&self) -> usize {
        self.bs_reflect.ncols() + self.bs_transmit.ncols()
    }
}

/// Angles of the BS-surface link: azimuth arrival, azimuth departure,
/// elevation arrival, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAngles {
    pub azimuth_arrival: f64,
    pub azimuth_departure: f64,
    pub elevation_arrival: f64,
}

pub fn link_angles(bs: &Point3, ris: &Point3) -> Result<LinkAngles> {
    let h = bs.horizontal_distance(ris);
    if h == 0.0 {
        return Err(Error::Geometry("BS and surface are horizontally coincident".into()));
    }
    let azimuth_arrival = ((ris.y - bs.y) / h).clamp(-1.0, 1.0).asin();
    let elevation_arrival = ((ris.z - bs.z) / h).clamp(-1.0, 1.0).asin();
    Ok(LinkAngles {
        azimuth_arrival,
        azimuth_departure: std::f64::consts::FRAC_PI_2 - azimuth_arrival,
        elevation_arrival,
    })
}

/// BS linear-array and surface planar-array steering vectors.
pub fn steering_vectors<T: Scalar>(
    cfg: &SystemConfig,
    geometry: &Geometry,
) -> Result<(Array1<Complex<T>>, Array1<Complex<T>>)> {
    let ang = link_angles(&geometry.bs, &geometry.ris)?;
    let lambda = cfg.wavelength_m();
    let (d_a, d_e) = (cfg.antenna_spacing(), cfg.element_spacing());
    let nx = cfg.row_width();
    let two_pi = 2.0 * std::f64::consts::PI;

    let a_b = Array1::from_shape_fn(cfg.antennas, |m| {
        let phase = two_pi * m as f64 * d_a * ang.azimuth_departure.sin() / lambda;
        unit(phase)
    });
    let (sa, sp, cp) = (
        ang.azimuth_arrival.sin(),
        ang.elevation_arrival.sin(),
        ang.elevation_arrival.cos(),
    );
    let a_r = Array1::from_shape_fn(cfg.elements, |idx| {
        // One-based element index with row index floor(n / N_x).
        let n = idx + 1;
        let row = (n / nx) as f64;
        let col = (n - (n / nx) * nx) as f64;
        let phase = two_pi * (n - 1) as f64 * d_e * (row * sa * sp + col * sa * cp) / lambda;
        unit(phase)
    });
    Ok((a_b, a_r))
}

fn unit<T: Scalar>(phase: f64) -> Complex<T> {
    Complex::new(T::lit(phase.cos()), T::lit(phase.sin()))
}

/// One circularly-symmetric standard complex normal draw.
pub fn complex_normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::lit(re * s), T::lit(im * s))
}

/// Rician BS-surface channel (M x N).
pub fn gen_bs_ris_channel<T: Scalar, R: Rng + ?Sized>(
    cfg: &SystemConfig,
    geometry: &Geometry,
    rng: &mut R,
) -> Result<Array2<Complex<T>>> {
    let k = cfg.rician_k;
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("rician factor must be non-negative, got {k}")));
    }
    let (a_b, a_r) = steering_vectors::<T>(cfg, geometry)?;
    let d = geometry.bs.distance(&geometry.ris);
    let amp = db_to_gain(pathloss_los(d, cfg.carrier_ghz)?).sqrt();
    let (w_los, w_nlos) = if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    };
    let (amp_los, amp_nlos) = (T::lit(amp * w_los), T::lit(amp * w_nlos));
    let mut h = Array2::zeros((cfg.antennas, cfg.elements));
    for ((m, n), z) in h.indexed_iter_mut() {
        let los = a_r[n] * a_b[m].conj();
        let g: Complex<T> = complex_normal(rng);
        *z = los * amp_los + g * amp_nlos;
    }
    Ok(h)
}

/// Rayleigh channel with i.i.d. `CN(0, L)` entries, `L` the NLoS path gain
/// between the two positions.
pub fn gen_rayleigh_channel<T: Scalar, R: Rng + ?Sized>(
    cfg: &SystemConfig,
    tx: &Point3,
    rx: &Point3,
    rng: &mut R,
    dims: (usize, usize),
) -> Result<Array2<Complex<T>>> {
    let d = tx.distance(rx);
    let gain = db_to_gain(pathloss_nlos(d, cfg.carrier_ghz, cfg.ris_pos.z)?);
    let amp = T::lit(gain.sqrt());
    let mut h = Array2::zeros(dims);
    for z in h.iter_mut() {
        let g: Complex<T> = complex_normal(rng);
        *z = g * amp;
    }
    Ok(h)
}

/// Draws the channels of one time slot.
pub fn draw_channels<T: Scalar, R: Rng + ?Sized>(
    cfg: &SystemConfig,
    geometry: &Geometry,
    rng: &mut R,
) -> Result<ChannelSet<T>> {
    let mut set = ChannelSet::zeros(cfg);
    set.bs_ris = gen_bs_ris_channel(cfg, geometry, rng)?;
    let (m, n) = (cfg.antennas, cfg.elements);
    let reflect: Vec<_> = geometry.reflect_users().copied().collect();
    let transmit: Vec<_> = geometry.transmit_users().copied().collect();
    for (j, u) in reflect.iter().enumerate() {
        let col = gen_rayleigh_channel::<T, R>(cfg, &geometry.bs, &u.pos, rng, (m, 1))?;
        set.bs_reflect.slice_mut(s![.., j]).assign(&col.column(0));
    }
    for (j, u) in transmit.iter().enumerate() {
        let col = gen_rayleigh_channel::<T, R>(cfg, &geometry.bs, &u.pos, rng, (m, 1))?;
        set.bs_transmit.slice_mut(s![.., j]).assign(&col.column(0));
    }
    for (j, u) in reflect.iter().enumerate() {
        let col = gen_rayleigh_channel::<T, R>(cfg, &geometry.ris, &u.pos, rng, (n, 1))?;
        set.ris_reflect.slice_mut(s![.., j]).assign(&col.column(0));
    }
    for (j, u) in transmit.iter().enumerate() {
        let col = gen_rayleigh_channel::<T, R>(cfg, &geometry.ris, &u.pos, rng, (n, 1))?;
        set.ris_transmit.slice_mut(s![.., j]).assign(&col.column(0));
    }
    Ok(set)
}

/// Serializes complex matrices as rows of interleaved `[re, im]` pairs.
pub mod complex_matrix {
    use ndarray::Array2;
    use num_complex::Complex;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::Scalar;

    pub fn serialize<T: Scalar, S: Serializer>(m: &Array2<Complex<T>>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = m
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()]).collect())
            .collect();
        (m.dim(), rows).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Array2<Complex<T>>, D::Error> {
        let ((r, c), rows): ((usize, usize), Vec<Vec<[f64; 2]>>) = Deserialize::deserialize(d)?;
        let flat: Vec<Complex<T>> = rows
            .into_iter()
            .flatten()
            .map(|[re, im]| Complex::new(T::lit(re), T::lit(im)))
            .collect();
        Array2::from_shape_vec((r, c), flat).map_err(D::Error::custom)
    }
}
