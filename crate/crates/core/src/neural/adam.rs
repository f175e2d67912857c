use serde::{Deserialize, Serialize};

use super::{Grads, NetParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment accumulators, one flat buffer per trainable array.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub cfg: AdamConfig,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &NetParams<T>, cfg: AdamConfig) -> Self {
        let m: Vec<Vec<T>> = params.trainable_lens().into_iter().map(|n| vec![T::zero(); n]).collect();
        Self {
            cfg,
            v: m.clone(),
            m,
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update.
pub fn adam_step<T: Scalar>(params: &mut NetParams<T>, grads: &Grads<T>, state: &mut AdamState<T>) -> Result<()> {
    let g = grads.arrays();
    let lens = params.trainable_lens();
    let fits = lens.len() == g.len()
        && lens.len() == state.m.len()
        && lens.iter().zip(&g).zip(&state.m).all(|((&n, g), m)| n == g.len() && n == m.len());
    if !fits {
        return Err(Error::Shape("gradients do not match the parameters".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.cfg.beta1, state.cfg.beta2);
    // p -= lr * (m / c1) / (sqrt(v / c2) + eps)
    let step = T::lit(state.cfg.lr / (1.0 - b1.powi(t)));
    let inv_c2 = T::lit(1.0 / (1.0 - b2.powi(t)));
    let eps = T::lit(state.cfg.eps);
    let (b1, b2) = (T::lit(b1), T::lit(b2));
    let (a1, a2) = (T::one() - b1, T::one() - b2);
    for (((p, g), m), v) in params
        .trainable_mut()
        .into_iter()
        .zip(g)
        .zip(&mut state.m)
        .zip(&mut state.v)
    {
        for (((p, &g), m), v) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = b1 * *m + a1 * g;
            *v = b2 * *v + a2 * g * g;
            *p = *p - step * *m / ((*v * inv_c2).sqrt() + eps);
        }
    }
    params.bump();
    Ok(())
}
