use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{Point3, SystemConfig};
use crate::error::{Error, Result};

/// Which half-space of the surface a user occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Same side as the BS, served by the reflected wave.
    Reflect,
    /// Behind the surface, served by the transmitted wave.
    Transmit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub pos: Point3,
    pub side: Side,
}

/// Node positions for one episode. Users are ordered reflect-side first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub bs: Point3,
    pub ris: Point3,
    pub users: Vec<User>,
}

impl Geometry {
    pub fn reflect_users(&self) -> impl Iterator<Item = &User> {
        self.users.iter().filter(|u| u.side == Side::Reflect)
    }

    pub fn transmit_users(&self) -> impl Iterator<Item = &User> {
        self.users.iter().filter(|u| u.side == Side::Transmit)
    }

    /// Horizontal unit vector pointing from the surface toward the BS.
    pub fn facing(&self) -> Result<(f64, f64)> {
        facing(&self.bs, &self.ris)
    }

    /// Checks the half-space labelling and the reflect-first ordering.
    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        let (fx, fy) = self.facing()?;
        let mut seen_transmit = false;
        let mut counts = (0, 0);
        for (k, u) in self.users.iter().enumerate() {
            let proj = (u.pos.x - self.ris.x) * fx + (u.pos.y - self.ris.y) * fy;
            match u.side {
                Side::Reflect => {
                    if seen_transmit {
                        return Err(Error::Geometry(format!("user {k}: reflect user after transmit users")));
                    }
                    if proj < 0.0 {
                        return Err(Error::Geometry(format!("user {k}: reflect user behind the surface")));
                    }
                    counts.0 += 1;
                }
                Side::Transmit => {
                    seen_transmit = true;
                    if proj > 0.0 {
                        return Err(Error::Geometry(format!("user {k}: transmit user in front of the surface")));
                    }
                    counts.1 += 1;
                }
            }
        }
        if counts != (cfg.reflect_users, cfg.transmit_users) {
            return Err(Error::Geometry(format!(
                "labels give {counts:?}, config expects ({}, {})",
                cfg.reflect_users, cfg.transmit_users
            )));
        }
        Ok(())
    }
}

fn facing(bs: &Point3, ris: &Point3) -> Result<(f64, f64)> {
    let (dx, dy) = (bs.x - ris.x, bs.y - ris.y);
    let h = dx.hypot(dy);
    if h == 0.0 {
        return Err(Error::Geometry("BS and surface share a horizontal position".into()));
    }
    Ok((dx / h, dy / h))
}

/// Drops the users uniformly on the two half-discs around the surface.
pub fn place_users<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<Geometry> {
    let radius = cfg.user_region_radius_m;
    if !(radius > 0.0) {
        return Err(Error::Geometry(format!("user region radius must be positive, got {radius}")));
    }
    let (fx, fy) = facing(&cfg.bs_pos, &cfg.ris_pos)?;
    let mut users = Vec::with_capacity(cfg.users());
    let sides = std::iter::repeat_n(Side::Reflect, cfg.reflect_users)
        .chain(std::iter::repeat_n(Side::Transmit, cfg.transmit_users));
    for side in sides {
        // Area-uniform radius; bearing uniform across the half-disc.
        let r = radius * rng.random::<f64>().sqrt();
        let phi = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
        let sign = match side {
            Side::Reflect => 1.0,
            Side::Transmit => -1.0,
        };
        let (nx, ny) = (sign * fx, sign * fy);
        // Tangent is the normal rotated by +90 degrees.
        let (tx, ty) = (-ny, nx);
        let (c, s) = (phi.cos(), phi.sin());
        users.push(User {
            pos: Point3::new(
                cfg.ris_pos.x + r * (c * nx + s * tx),
                cfg.ris_pos.y + r * (c * ny + s * ty),
                cfg.user_height_m,
            ),
            side,
        });
    }
    Ok(Geometry {
        bs: cfg.bs_pos,
        ris: cfg.ris_pos,
        users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_transmit_when_no_reflect_users() {
        let cfg = SystemConfig {
            reflect_users: 0,
            transmit_users: 4,
            ..SystemConfig::default()
        };
        let g = place_users(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(g.reflect_users().count(), 0);
        assert_eq!(g.transmit_users().count(), 4);
        g.validate(&cfg).unwrap();
    }

    #[test]
    fn deterministic_for_seed() {
        let cfg = SystemConfig::default();
        let a = place_users(&cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = place_users(&cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_radius_is_error() {
        let cfg = SystemConfig {
            user_region_radius_m: 0.0,
            ..SystemConfig::default()
        };
        assert!(place_users(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn half_discs_hold_over_many_draws() {
        let cfg = SystemConfig {
            reflect_users: 2,
            transmit_users: 2,
            user_region_radius_m: 50.0,
            ..SystemConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let g = place_users(&cfg, &mut rng).unwrap();
            g.validate(&cfg).unwrap();
            for u in &g.users {
                assert!(u.pos.horizontal_distance(&cfg.ris_pos) <= 50.0 + 1e-9);
                assert_eq!(u.pos.z, 1.5);
            }
            // Default layout puts the BS at smaller x than the surface.
            assert!(g.reflect_users().all(|u| u.pos.x <= cfg.ris_pos.x));
            assert!(g.transmit_users().all(|u| u.pos.x >= cfg.ris_pos.x));
        }
    }
}
