//! Urban macro path loss, distances in meters and carrier in GHz.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Line-of-sight path loss in dB.
pub fn pathloss_los<T: Scalar>(d: T, fc_ghz: T) -> Result<T> {
    check_args(d, fc_ghz)?;
    Ok(T::lit(22.0) * d.log10() + T::lit(28.0) + T::lit(20.0) * fc_ghz.log10())
}

/// Non-line-of-sight path loss in dB, never below the LoS value.
///
/// `z_r` is the height term of the NLoS branch, `-0.3 (z_r - 1.5)`.
pub fn pathloss_nlos<T: Scalar>(d: T, fc_ghz: T, z_r: T) -> Result<T> {
    let los = pathloss_los(d, fc_ghz)?;
    let nlos = T::lit(36.7) * d.log10() + T::lit(22.7) + T::lit(26.0) * fc_ghz.log10()
        - T::lit(0.3) * (z_r - T::lit(1.5));
    Ok(los.max(nlos))
}

/// Power-domain gain `10^(-dB/10)`.
pub fn db_to_gain<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(-db / T::lit(10.0))
}

fn check_args<T: Scalar>(d: T, fc_ghz: T) -> Result<()> {
    if !(d > T::zero()) || !d.is_finite() {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    if !(fc_ghz > T::zero()) {
        return Err(Error::Domain(format!("carrier must be positive, got {fc_ghz}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn los_examples() {
        assert_eq!(pathloss_los(1.0, 1.0).unwrap(), 28.0);
        assert!(close(pathloss_los(100.0, 5.0).unwrap(), 85.98, 0.005));
        assert!(close(pathloss_los(4000.0, 5.0).unwrap(), 121.22, 0.005));
    }

    #[test]
    fn nlos_examples() {
        assert_eq!(pathloss_nlos(1.0, 1.0, 1.5).unwrap(), 28.0);
        assert!(close(pathloss_nlos(100.0, 5.0, 1.5).unwrap(), 114.27, 0.005));
        assert!(close(pathloss_nlos(100.0, 5.0, 11.5).unwrap(), 111.27, 0.005));
    }

    #[test]
    fn non_positive_distance_rejected() {
        assert!(pathloss_los(0.0, 5.0).is_err());
        assert!(pathloss_nlos(-3.0, 5.0, 1.5).is_err());
    }

    #[test]
    fn gain_of_zero_db_is_one() {
        assert_eq!(db_to_gain(0.0f64), 1.0);
        assert!(close(db_to_gain(30.0f64), 1e-3, 1e-15));
    }
}
