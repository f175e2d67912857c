//! Small dense network engine: fully connected layers, batch normalization,
//! ReLU and tanh, exact backpropagation, Adam and soft target updates.
//!
//! Batches are row-major `(batch, features)`. A network may join a second
//! input once through a [`LayerKind::ConcatInput`] layer, which is how the
//! critic receives the action next to the normalized state.

mod adam;
mod checkpoint;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, NamedArray};

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use ndarray::linalg::general_mat_mul;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const BN_MOMENTUM: f64 = 0.99;
pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Dense,
    BatchNorm,
    Relu,
    Tanh,
    /// Appends the auxiliary input to the running activations.
    ConcatInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl LayerSpec {
    pub fn dense(in_dim: usize, out_dim: usize) -> Self {
        Self { kind: LayerKind::Dense, in_dim, out_dim }
    }

    pub fn batch_norm(dim: usize) -> Self {
        Self { kind: LayerKind::BatchNorm, in_dim: dim, out_dim: dim }
    }

    pub fn relu(dim: usize) -> Self {
        Self { kind: LayerKind::Relu, in_dim: dim, out_dim: dim }
    }

    pub fn tanh(dim: usize) -> Self {
        Self { kind: LayerKind::Tanh, in_dim: dim, out_dim: dim }
    }

    pub fn concat(dim: usize, extra: usize) -> Self {
        Self { kind: LayerKind::ConcatInput, in_dim: dim, out_dim: dim + extra }
    }
}

/// Checks dimensions chain and every layer kind is used consistently.
pub fn validate_spec(spec: &[LayerSpec]) -> Result<()> {
    if spec.is_empty() {
        return Err(Error::Shape("network has no layers".into()));
    }
    let mut concats = 0;
    for (i, l) in spec.iter().enumerate() {
        if l.in_dim == 0 || l.out_dim == 0 {
            return Err(Error::Shape(format!("layer {i} has a zero dimension")));
        }
        match l.kind {
            LayerKind::Dense => {}
            LayerKind::ConcatInput => {
                concats += 1;
                if l.out_dim <= l.in_dim {
                    return Err(Error::Shape(format!("concat layer {i} must widen its input")));
                }
            }
            _ if l.in_dim != l.out_dim => {
                return Err(Error::Shape(format!("layer {i} ({:?}) must keep its width", l.kind)));
            }
            _ => {}
        }
        if i > 0 && spec[i - 1].out_dim != l.in_dim {
            return Err(Error::Shape(format!(
                "layer {i} expects {} inputs but layer {} emits {}",
                l.in_dim,
                i - 1,
                spec[i - 1].out_dim
            )));
        }
    }
    if concats > 1 {
        return Err(Error::Shape("at most one concat layer is supported".into()));
    }
    Ok(())
}

/// Sum over dense layers of `in_dim * out_dim`: multiplies per sample of one
/// forward pass.
pub fn dense_multiplies(spec: &[LayerSpec]) -> usize {
    spec.iter()
        .filter(|l| l.kind == LayerKind::Dense)
        .map(|l| l.in_dim * l.out_dim)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams<T> {
    Dense {
        /// `in_dim x out_dim`.
        w: Array2<T>,
        b: Array1<T>,
    },
    BatchNorm {
        gamma: Array1<T>,
        beta: Array1<T>,
        running_mean: Array1<T>,
        running_var: Array1<T>,
    },
    Stateless,
}

/// Parameters of one network. `version` moves whenever trainable values
/// change so backward passes can reject caches from older weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams<T> {
    pub layers: Vec<LayerParams<T>>,
    version: u64,
}

impl<T: Scalar> NetParams<T> {
    pub fn version(&self) -> u64 {
        self.version
    }

    pub(crate) fn bump(&mut self) {
        self.version += 1;
    }

    /// Every stored array in a fixed order, running statistics included.
    pub fn named_arrays(&self) -> Vec<(String, Vec<usize>, &[T])> {
        let mut out = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            match l {
                LayerParams::Dense { w, b } => {
                    out.push((format!("{i}.dense.w"), w.shape().to_vec(), slice(w.as_slice())));
                    out.push((format!("{i}.dense.b"), b.shape().to_vec(), slice(b.as_slice())));
                }
                LayerParams::BatchNorm { gamma, beta, running_mean, running_var } => {
                    for (name, a) in [
                        ("gamma", gamma),
                        ("beta", beta),
                        ("running_mean", running_mean),
                        ("running_var", running_var),
                    ] {
                        out.push((format!("{i}.batch_norm.{name}"), a.shape().to_vec(), slice(a.as_slice())));
                    }
                }
                LayerParams::Stateless => {}
            }
        }
        out
    }

    /// Mutable views in the order of [`NetParams::named_arrays`].
    pub fn arrays_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            match l {
                LayerParams::Dense { w, b } => {
                    out.push(slice_mut(w.as_slice_mut()));
                    out.push(slice_mut(b.as_slice_mut()));
                }
                LayerParams::BatchNorm { gamma, beta, running_mean, running_var } => {
                    out.push(slice_mut(gamma.as_slice_mut()));
                    out.push(slice_mut(beta.as_slice_mut()));
                    out.push(slice_mut(running_mean.as_slice_mut()));
                    out.push(slice_mut(running_var.as_slice_mut()));
                }
                LayerParams::Stateless => {}
            }
        }
        out
    }

    /// Lengths of the trainable arrays, in the order of [`Grads::arrays`].
    pub fn trainable_lens(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| match l {
                LayerParams::Dense { w, b } => vec![w.len(), b.len()],
                LayerParams::BatchNorm { gamma, beta, .. } => vec![gamma.len(), beta.len()],
                LayerParams::Stateless => vec![],
            })
            .collect()
    }

    /// Mutable views of the trainable arrays, in the order of [`Grads::arrays`].
    pub fn trainable_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            match l {
                LayerParams::Dense { w, b } => {
                    out.push(slice_mut(w.as_slice_mut()));
                    out.push(slice_mut(b.as_slice_mut()));
                }
                LayerParams::BatchNorm { gamma, beta, .. } => {
                    out.push(slice_mut(gamma.as_slice_mut()));
                    out.push(slice_mut(beta.as_slice_mut()));
                }
                LayerParams::Stateless => {}
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.named_arrays()
            .iter()
            .all(|(_, _, a)| a.iter().all(|x| x.is_finite()))
    }
}

fn slice<T>(s: Option<&[T]>) -> &[T] {
    s.expect("parameter arrays are contiguous")
}

fn slice_mut<T>(s: Option<&mut [T]>) -> &mut [T] {
    s.expect("parameter arrays are contiguous")
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerGrad<T> {
    Dense { w: Array2<T>, b: Array1<T> },
    BatchNorm { gamma: Array1<T>, beta: Array1<T> },
    Stateless,
}

/// Gradients of the trainable parameters, shaped like [`NetParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<T> {
    pub layers: Vec<LayerGrad<T>>,
}

impl<T: Scalar> Grads<T> {
    pub fn arrays(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for l in &self.layers {
            match l {
                LayerGrad::Dense { w, b } => {
                    out.push(slice(w.as_slice()));
                    out.push(slice(b.as_slice()));
                }
                LayerGrad::BatchNorm { gamma, beta } => {
                    out.push(slice(gamma.as_slice()));
                    out.push(slice(beta.as_slice()));
                }
                LayerGrad::Stateless => {}
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.arrays().iter().all(|a| a.iter().all(|x| x.is_zero()))
    }
}

/// Result of a backward pass.
#[derive(Debug, Clone)]
pub struct Backward<T> {
    pub params: Grads<T>,
    pub input: Array2<T>,
    /// Gradient with respect to the concatenated input, if any.
    pub aux: Option<Array2<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics in BN layers; running statistics are updated.
    Train,
    /// Running statistics in BN layers.
    Eval,
}

#[derive(Debug, Clone)]
enum LayerCache<T> {
    Dense { input: Array2<T> },
    BatchNorm { xhat: Array2<T>, inv_std: Array1<T> },
    Relu { input: Array2<T> },
    Tanh { output: Array2<T> },
    Concat { split: usize },
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct Cache<T> {
    version: u64,
    mode: Mode,
    layers: Vec<LayerCache<T>>,
}

impl<T> Cache<T> {
    pub fn mode(&self) -> Mode {
        self.mode
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    spec: Vec<LayerSpec>,
    pub params: NetParams<T>,
}

impl<T: Scalar> Network<T> {
    /// Glorot-uniform dense weights, zero biases, identity BN layers.
    pub fn new<R: Rng + ?Sized>(spec: Vec<LayerSpec>, rng: &mut R) -> Result<Self> {
        validate_spec(&spec)?;
        let layers = spec
            .iter()
            .map(|l| match l.kind {
                LayerKind::Dense => {
                    let limit = (6.0 / (l.in_dim + l.out_dim) as f64).sqrt();
                    LayerParams::Dense {
                        w: Array2::from_shape_fn((l.in_dim, l.out_dim), |_| {
                            T::lit(rng.random_range(-limit..=limit))
                        }),
                        b: Array1::zeros(l.out_dim),
                    }
                }
                LayerKind::BatchNorm => LayerParams::BatchNorm {
                    gamma: Array1::ones(l.in_dim),
                    beta: Array1::zeros(l.in_dim),
                    running_mean: Array1::zeros(l.in_dim),
                    running_var: Array1::ones(l.in_dim),
                },
                _ => LayerParams::Stateless,
            })
            .collect();
        Ok(Self {
            spec,
            params: NetParams { layers, version: 0 },
        })
    }

    pub fn spec(&self) -> &[LayerSpec] {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec[0].in_dim
    }

    pub fn aux_dim(&self) -> usize {
        self.spec
            .iter()
            .find(|l| l.kind == LayerKind::ConcatInput)
            .map_or(0, |l| l.out_dim - l.in_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.spec[self.spec.len() - 1].out_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.params
            .named_arrays()
            .iter()
            .filter(|(name, _, _)| !name.contains("running"))
            .map(|(_, _, a)| a.len())
            .sum()
    }

    /// Forward pass keeping intermediates for [`Network::backward`]. In
    /// train mode BN running statistics are blended toward the batch.
    pub fn forward(
        &mut self,
        x: ArrayView2<T>,
        aux: Option<ArrayView2<T>>,
        mode: Mode,
    ) -> Result<(Array2<T>, Cache<T>)> {
        let (out, cache, stats) = self.run(x, aux, mode, true)?;
        let momentum = T::lit(BN_MOMENTUM);
        for (i, mean, var) in stats {
            if let LayerParams::BatchNorm { running_mean, running_var, .. } = &mut self.params.layers[i] {
                Zip::from(running_mean).and(&mean).for_each(|r, &m| *r = momentum * *r + (T::one() - momentum) * m);
                Zip::from(running_var).and(&var).for_each(|r, &v| *r = momentum * *r + (T::one() - momentum) * v);
            }
        }
        Ok((out, cache.expect("cache requested")))
    }

    /// Eval-mode forward pass without side effects.
    pub fn predict(&self, x: ArrayView2<T>, aux: Option<ArrayView2<T>>) -> Result<Array2<T>> {
        Ok(self.run(x, aux, Mode::Eval, false)?.0)
    }

    #[allow(clippy::type_complexity)]
    fn run(
        &self,
        x: ArrayView2<T>,
        aux: Option<ArrayView2<T>>,
        mode: Mode,
        keep: bool,
    ) -> Result<(Array2<T>, Option<Cache<T>>, Vec<(usize, Array1<T>, Array1<T>)>)> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input width {} but network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let batch = x.nrows();
        match (self.aux_dim(), &aux) {
            (0, None) => {}
            (0, Some(_)) => return Err(Error::Shape("network takes no auxiliary input".into())),
            (_, None) => return Err(Error::Shape("network needs an auxiliary input".into())),
            (d, Some(a)) if a.ncols() != d || a.nrows() != batch => {
                return Err(Error::Shape(format!("auxiliary input {:?} but expected (_, {d})", a.dim())))
            }
            _ => {}
        }
        let eps = T::lit(BN_EPS);
        let mut h = x.to_owned();
        let mut caches = Vec::with_capacity(if keep { self.spec.len() } else { 0 });
        let mut stats = Vec::new();
        for (i, (l, p)) in self.spec.iter().zip(&self.params.layers).enumerate() {
            match (l.kind, p) {
                (LayerKind::Dense, LayerParams::Dense { w, b }) => {
                    let z = h.dot(w) + b;
                    if keep {
                        caches.push(LayerCache::Dense { input: h });
                    }
                    h = z;
                }
                (LayerKind::BatchNorm, LayerParams::BatchNorm { gamma, beta, running_mean, running_var }) => {
                    let (mean, var) = match mode {
                        Mode::Train => {
                            if batch == 0 {
                                return Err(Error::Shape("batch normalization needs a non-empty batch".into()));
                            }
                            let mean = h.mean_axis(Axis(0)).expect("non-empty batch");
                            let var = h.var_axis(Axis(0), T::zero());
                            stats.push((i, mean.clone(), var.clone()));
                            (mean, var)
                        }
                        Mode::Eval => (running_mean.clone(), running_var.clone()),
                    };
                    let inv_std = var.mapv(|v| T::one() / (v + eps).sqrt());
                    let xhat = (&h - &mean) * &inv_std;
                    h = &xhat * gamma + beta;
                    if keep {
                        caches.push(LayerCache::BatchNorm { xhat, inv_std });
                    }
                }
                (LayerKind::Relu, _) => {
                    let out = h.mapv(|v| v.max(T::zero()));
                    if keep {
                        caches.push(LayerCache::Relu { input: h });
                    }
                    h = out;
                }
                (LayerKind::Tanh, _) => {
                    h.mapv_inplace(|v| v.tanh());
                    if keep {
                        caches.push(LayerCache::Tanh { output: h.clone() });
                    }
                }
                (LayerKind::ConcatInput, _) => {
                    let a = aux.as_ref().expect("checked above");
                    h = ndarray::concatenate![Axis(1), h, *a];
                    if keep {
                        caches.push(LayerCache::Concat { split: l.in_dim });
                    }
                }
                _ => return Err(Error::Shape(format!("layer {i} parameters do not match its kind"))),
            }
        }
        let cache = keep.then(|| Cache {
            version: self.params.version,
            mode,
            layers: caches,
        });
        Ok((h, cache, stats))
    }

    /// Exact gradients of `sum(out_grad * output)` for the pass that produced
    /// `cache`.
    pub fn backward(&self, cache: &Cache<T>, out_grad: ArrayView2<T>) -> Result<Backward<T>> {
        if cache.version != self.params.version {
            return Err(Error::StaleCache {
                cache: cache.version,
                params: self.params.version,
            });
        }
        if cache.layers.len() != self.spec.len() {
            return Err(Error::Shape("cache belongs to a different network".into()));
        }
        if out_grad.ncols() != self.output_dim() {
            return Err(Error::Shape(format!(
                "output gradient width {} but network emits {}",
                out_grad.ncols(),
                self.output_dim()
            )));
        }
        let mut g = out_grad.to_owned();
        let mut grads = vec![LayerGrad::Stateless; self.spec.len()];
        let mut aux = None;
        for i in (0..self.spec.len()).rev() {
            match (&cache.layers[i], &self.params.layers[i]) {
                (LayerCache::Dense { input }, LayerParams::Dense { w, .. }) => {
                    let mut gw = Array2::zeros(w.raw_dim());
                    general_mat_mul(T::one(), &input.t(), &g, T::zero(), &mut gw);
                    grads[i] = LayerGrad::Dense {
                        w: gw,
                        b: g.sum_axis(Axis(0)),
                    };
                    g = g.dot(&w.t());
                }
                (LayerCache::BatchNorm { xhat, inv_std }, LayerParams::BatchNorm { gamma, .. }) => {
                    grads[i] = LayerGrad::BatchNorm {
                        gamma: (&g * xhat).sum_axis(Axis(0)),
                        beta: g.sum_axis(Axis(0)),
                    };
                    let dxhat = &g * gamma;
                    g = match cache.mode {
                        Mode::Eval => dxhat * inv_std,
                        Mode::Train => {
                            let n = T::lit(g.nrows() as f64);
                            let sum = dxhat.sum_axis(Axis(0));
                            let dot = (&dxhat * xhat).sum_axis(Axis(0));
                            (dxhat * n - &sum - &(xhat * &dot)) * &inv_std.mapv(|s| s / n)
                        }
                    };
                }
                (LayerCache::Relu { input }, _) => {
                    Zip::from(&mut g).and(input).for_each(|g, &x| {
                        if !(x > T::zero()) {
                            *g = T::zero();
                        }
                    });
                }
                (LayerCache::Tanh { output }, _) => {
                    Zip::from(&mut g).and(output).for_each(|g, &y| *g = *g * (T::one() - y * y));
                }
                (LayerCache::Concat { split }, _) => {
                    aux = Some(g.slice(s![.., *split..]).to_owned());
                    g = g.slice(s![.., ..*split]).to_owned();
                }
                _ => return Err(Error::Shape(format!("cache entry {i} does not match the network"))),
            }
        }
        Ok(Backward {
            params: Grads { layers: grads },
            input: g,
            aux,
        })
    }

    pub fn dense_multiplies(&self) -> usize {
        dense_multiplies(&self.spec)
    }
}

/// `target <- (1 - tau) target + tau online` over every stored array,
/// BN running statistics included.
pub fn soft_update<T: Scalar>(target: &mut NetParams<T>, online: &NetParams<T>, tau: T) -> Result<()> {
    if !(tau >= T::zero() && tau <= T::one()) {
        return Err(Error::Domain(format!("tau must lie in [0, 1], got {tau}")));
    }
    let src = online.named_arrays();
    let shapes_match = {
        let dst = target.named_arrays();
        dst.len() == src.len() && dst.iter().zip(&src).all(|(a, b)| a.0 == b.0 && a.1 == b.1)
    };
    if !shapes_match {
        return Err(Error::Shape("soft update between differently shaped networks".into()));
    }
    let keep = T::one() - tau;
    for (dst, (_, _, src)) in target.arrays_mut().into_iter().zip(src) {
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = keep * *d + tau * s;
        }
    }
    target.bump();
    Ok(())
}
