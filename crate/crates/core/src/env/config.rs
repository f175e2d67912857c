use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Surface variant placed between the BS and the users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RisMode {
    /// Energy-splitting STAR surface: every element reflects and transmits.
    #[default]
    Star,
    /// Conventional surface; transmit-side users get no surface path.
    ReflectOnly,
    /// Two back-to-back reflecting half-surfaces, `N/2` elements each.
    DoubleSpliced,
}

impl RisMode {
    pub const ALL: [RisMode; 3] = [RisMode::Star, RisMode::DoubleSpliced, RisMode::ReflectOnly];

    pub fn name(self) -> &'static str {
        match self {
            RisMode::Star => "star",
            RisMode::ReflectOnly => "reflect_only",
            RisMode::DoubleSpliced => "double_spliced",
        }
    }
}

impl std::fmt::Display for RisMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn horizontal_distance(&self, other: &Point3) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(p: [f64; 3]) -> Self {
        Point3::new(p[0], p[1], p[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Physical and scenario constants of one STAR-RIS downlink.
///
/// Optional fields are derived from the others when absent: element
/// spacings default to half a wavelength, the row width to the smallest
/// divisor of `elements` not below `ceil(sqrt(elements))`, and the noise
/// power to the density times the bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// BS antennas (M).
    pub antennas: usize,
    /// Surface elements (N).
    pub elements: usize,
    /// Elements per row of the planar array (N_x).
    pub elements_per_row: Option<usize>,
    /// Reflect-side users (U).
    pub reflect_users: usize,
    /// Transmit-side users (I).
    pub transmit_users: usize,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    /// Power ceiling per BS antenna, watts.
    pub p_max_w: f64,
    pub noise_dbm_per_mhz: f64,
    /// Overrides the density-derived noise power when set.
    pub noise_w: Option<f64>,
    /// Rician factor of the BS-surface link, linear.
    pub rician_k: f64,
    pub antenna_spacing_m: Option<f64>,
    pub element_spacing_m: Option<f64>,
    /// Per-user rate floor, bit/s.
    pub rate_qos_bps: f64,
    /// Reward per satisfied user.
    pub reward_hit: f64,
    /// Reward cost per watt of transmit power.
    pub reward_power: f64,
    pub ris_mode: RisMode,
    pub bs_pos: Point3,
    pub ris_pos: Point3,
    pub user_height_m: f64,
    pub user_region_radius_m: f64,
    /// Time slots per episode (T).
    pub episode_len: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            antennas: 4,
            elements: 12,
            elements_per_row: None,
            reflect_users: 2,
            transmit_users: 2,
            carrier_ghz: 5.0,
            bandwidth_hz: 1.0e6,
            // 29 dBm
            p_max_w: 10f64.powf(2.9) / 1000.0,
            noise_dbm_per_mhz: -95.2,
            noise_w: None,
            // 3 dB
            rician_k: 10f64.powf(0.3),
            antenna_spacing_m: None,
            element_spacing_m: None,
            rate_qos_bps: DEFAULT_RATE_QOS_BPS,
            reward_hit: 200.0,
            reward_power: 10.0,
            ris_mode: RisMode::Star,
            bs_pos: Point3::new(0.0, 0.0, 25.0),
            ris_pos: Point3::new(4000.0, 0.0, DEFAULT_RIS_HEIGHT_M),
            user_height_m: 1.5,
            user_region_radius_m: DEFAULT_USER_REGION_RADIUS_M,
            episode_len: 30,
        }
    }
}

pub const DEFAULT_RATE_QOS_BPS: f64 = 100.0;
pub const DEFAULT_RIS_HEIGHT_M: f64 = 2.0;
pub const DEFAULT_USER_REGION_RADIUS_M: f64 = 3.0;

impl SystemConfig {
    /// Total users K = U + I.
    pub fn users(&self) -> usize {
        self.reflect_users + self.transmit_users
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / (self.carrier_ghz * 1.0e9)
    }

    pub fn antenna_spacing(&self) -> f64 {
        self.antenna_spacing_m
            .unwrap_or_else(|| self.wavelength_m() / 2.0)
    }

    pub fn element_spacing(&self) -> f64 {
        self.element_spacing_m
            .unwrap_or_else(|| self.wavelength_m() / 2.0)
    }

    pub fn row_width(&self) -> usize {
        self.elements_per_row
            .unwrap_or_else(|| default_row_width(self.elements))
    }

    /// Noise power in watts.
    pub fn sigma2(&self) -> f64 {
        self.noise_w.unwrap_or_else(|| {
            10f64.powf((self.noise_dbm_per_mhz - 30.0) / 10.0) * (self.bandwidth_hz / 1.0e6)
        })
    }

    /// Checks every invariant; the first violation is reported with its field.
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::config("antennas", "must be positive"));
        }
        if self.elements == 0 {
            return Err(Error::config("elements", "must be positive"));
        }
        if self.users() == 0 {
            return Err(Error::config("reflect_users", "at least one user required"));
        }
        let nx = self.row_width();
        if nx == 0 || self.elements % nx != 0 {
            return Err(Error::config(
                "elements_per_row",
                format!("{nx} does not divide {} elements", self.elements),
            ));
        }
        if self.ris_mode == RisMode::DoubleSpliced && self.elements % 2 != 0 {
            return Err(Error::config(
                "elements",
                "double_spliced mode needs an even element count",
            ));
        }
        positive("carrier_ghz", self.carrier_ghz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("p_max_w", self.p_max_w)?;
        positive("noise_w", self.sigma2())?;
        positive("antenna_spacing_m", self.antenna_spacing())?;
        positive("element_spacing_m", self.element_spacing())?;
        positive("user_region_radius_m", self.user_region_radius_m)?;
        if !(self.rician_k >= 0.0) {
            return Err(Error::config("rician_k", "must be non-negative"));
        }
        if !(self.rate_qos_bps >= 0.0) {
            return Err(Error::config("rate_qos_bps", "must be non-negative"));
        }
        if !(self.reward_power >= 0.0) {
            return Err(Error::config("reward_power", "must be non-negative"));
        }
        let ceiling = self.users() as f64 * self.reward_power * self.antennas as f64 * self.p_max_w;
        if !(self.reward_hit > ceiling) {
            return Err(Error::config(
                "reward_hit",
                format!(
                    "ordering condition reward_hit > K * reward_power * M * p_max violated ({} <= {ceiling})",
                    self.reward_hit
                ),
            ));
        }
        if self.bs_pos.horizontal_distance(&self.ris_pos) == 0.0 {
            return Err(Error::config("ris_pos", "BS and surface share a horizontal position"));
        }
        if self.episode_len == 0 {
            return Err(Error::config("episode_len", "must be positive"));
        }
        Ok(())
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

/// Smallest divisor of `n` that is at least `ceil(sqrt(n))`.
pub fn default_row_width(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let start = (n as f64).sqrt().ceil() as usize;
    (start.max(1)..=n).find(|d| n % d == 0).unwrap_or(n)
}
