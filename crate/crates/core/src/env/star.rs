use ndarray::Array1;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::config::RisMode;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Passive beamforming configuration: per-element reflection phase,
/// transmission phase and reflection amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarState<T> {
    pub theta_reflect: Array1<T>,
    pub theta_transmit: Array1<T>,
    pub beta: Array1<T>,
}

impl<T: Scalar> StarState<T> {
    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    /// Largest coupling residual over all elements.
    pub fn max_residual(&self) -> T {
        coupling_residual(self).fold(T::zero(), |a, &b| a.max(b))
    }
}

/// Diagonals of the reflection and transmission coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct StarCoefficients<T> {
    pub reflect: Array1<Complex<T>>,
    pub transmit: Array1<Complex<T>>,
}

/// `|beta sqrt(1 - beta^2) cos(theta_R - theta_T)|` per element.
pub fn coupling_residual<T: Scalar>(s: &StarState<T>) -> Array1<T> {
    Array1::from_shape_fn(s.len(), |n| {
        let b = s.beta[n];
        let t = (T::one() - b * b).max(T::zero()).sqrt();
        (b * t * (s.theta_reflect[n] - s.theta_transmit[n]).cos()).abs()
    })
}

pub fn star_matrices<T: Scalar>(s: &StarState<T>, mode: RisMode) -> Result<StarCoefficients<T>> {
    let n = s.len();
    if s.theta_reflect.len() != n || s.theta_transmit.len() != n {
        return Err(Error::Shape(format!(
            "star state lengths differ: {} / {} / {n}",
            s.theta_reflect.len(),
            s.theta_transmit.len()
        )));
    }
    let zero = Complex::new(T::zero(), T::zero());
    match mode {
        RisMode::Star => {
            let reflect = Array1::from_shape_fn(n, |i| Complex::from_polar(s.beta[i], s.theta_reflect[i]));
            let transmit = Array1::from_shape_fn(n, |i| {
                let amp = (T::one() - s.beta[i] * s.beta[i]).max(T::zero()).sqrt();
                Complex::from_polar(amp, s.theta_transmit[i])
            });
            Ok(StarCoefficients { reflect, transmit })
        }
        RisMode::ReflectOnly => Ok(StarCoefficients {
            reflect: Array1::from_shape_fn(n, |i| Complex::from_polar(T::one(), s.theta_reflect[i])),
            transmit: Array1::from_elem(n, zero),
        }),
        RisMode::DoubleSpliced => {
            if n % 2 != 0 {
                return Err(Error::Domain(format!("double spliced surface needs even N, got {n}")));
            }
            let half = n / 2;
            let reflect = Array1::from_shape_fn(n, |i| {
                if i < half {
                    Complex::from_polar(T::one(), s.theta_reflect[i])
                } else {
                    zero
                }
            });
            let transmit = Array1::from_shape_fn(n, |i| {
                if i >= half {
                    Complex::from_polar(T::one(), s.theta_transmit[i])
                } else {
                    zero
                }
            });
            Ok(StarCoefficients { reflect, transmit })
        }
    }
}
