use ndarray::Array1;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Ornstein-Uhlenbeck action noise with unit time step and a volatility
/// that decays once per episode.
#[derive(Debug, Clone, PartialEq)]
pub struct OuNoise {
    pub x: Array1<f64>,
    pub theta: f64,
    pub xi: f64,
    pub xi_min: f64,
    pub decay: f64,
}

impl OuNoise {
    pub fn new(dim: usize, theta: f64, xi: f64, xi_min: f64, decay: f64) -> Self {
        Self {
            x: Array1::zeros(dim),
            theta,
            xi,
            xi_min: xi_min.min(xi),
            decay,
        }
    }

    /// `x <- x - theta x + xi n`, `n` standard normal.
    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &Array1<f64> {
        let (theta, xi) = (self.theta, self.xi);
        self.x.mapv_inplace(|x| {
            let n: f64 = StandardNormal.sample(rng);
            x - theta * x + xi * n
        });
        &self.x
    }

    pub fn reset(&mut self) {
        self.x.fill(0.0);
    }

    pub fn end_episode(&mut self) {
        self.xi = (self.xi * self.decay).max(self.xi_min);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSchedule {
    pub eps: f64,
    pub eps_min: f64,
    pub decay: f64,
}

impl EpsilonSchedule {
    pub fn new(eps0: f64, eps_min: f64, decay: f64) -> Self {
        Self {
            eps: eps0,
            eps_min: eps_min.min(eps0),
            decay,
        }
    }

    pub fn value(&self) -> f64 {
        self.eps
    }

    pub fn end_episode(&mut self) {
        self.eps = (self.eps * self.decay).max(self.eps_min);
    }
}
