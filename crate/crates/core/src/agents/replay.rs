use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Action payload of a transition: a continuous vector or a discrete index.
pub trait Action: Clone {
    /// `dim` is the vector length, or the number of discrete actions.
    fn fits(&self, dim: usize) -> bool;
}

impl<T> Action for Array1<T>
where
    T: Clone,
{
    fn fits(&self, dim: usize) -> bool {
        self.len() == dim
    }
}

impl Action for usize {
    fn fits(&self, dim: usize) -> bool {
        *self < dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T, A> {
    pub s: Array1<T>,
    pub a: A,
    pub r: T,
    pub s_next: Array1<T>,
    /// Last slot of the episode: the target does not bootstrap.
    pub done: bool,
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T, A> {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    items: Vec<Transition<T, A>>,
    cursor: usize,
}

impl<T: Scalar, A: Action> ReplayBuffer<T, A> {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            state_dim,
            action_dim,
            items: Vec::new(),
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition<T, A>) -> Result<()> {
        if t.s.len() != self.state_dim || t.s_next.len() != self.state_dim || !t.a.fits(self.action_dim) {
            return Err(Error::Shape(format!(
                "transition does not match buffer schema ({} state, {} action)",
                self.state_dim, self.action_dim
            )));
        }
        if !t.r.is_finite() {
            return Err(Error::Domain(format!("reward must be finite, got {}", t.r)));
        }
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    /// Stored transitions in slot order (not insertion order after a wrap).
    pub fn items(&self) -> &[Transition<T, A>] {
        &self.items
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, e: usize, rng: &mut R) -> Result<Vec<&Transition<T, A>>> {
        if self.items.len() < e || e == 0 {
            return Err(Error::NotReady {
                have: self.items.len(),
                need: e.max(1),
            });
        }
        Ok((0..e)
            .map(|_| &self.items[rng.random_range(0..self.items.len())])
            .collect())
    }
}

fn stack<T: Scalar>(rows: impl ExactSizeIterator<Item = Array1<T>>, dim: usize) -> Array2<T> {
    let n = rows.len();
    let mut out = Array2::zeros((n, dim));
    for (mut dst, src) in out.rows_mut().into_iter().zip(rows) {
        dst.assign(&src);
    }
    out
}

#[derive(Debug, Clone)]
pub struct ContinuousBatch<T> {
    pub s: Array2<T>,
    pub a: Array2<T>,
    pub r: Array1<T>,
    pub s_next: Array2<T>,
    /// 1 for terminal transitions, else 0.
    pub done: Array1<T>,
}

impl<T: Scalar> ContinuousBatch<T> {
    pub fn from_transitions(items: &[&Transition<T, Array1<T>>]) -> Self {
        let sd = items.first().map_or(0, |t| t.s.len());
        let ad = items.first().map_or(0, |t| t.a.len());
        Self {
            s: stack(items.iter().map(|t| t.s.clone()), sd),
            a: stack(items.iter().map(|t| t.a.clone()), ad),
            r: items.iter().map(|t| t.r).collect(),
            s_next: stack(items.iter().map(|t| t.s_next.clone()), sd),
            done: items.iter().map(|t| if t.done { T::one() } else { T::zero() }).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteBatch<T> {
    pub s: Array2<T>,
    pub a: Vec<usize>,
    pub r: Array1<T>,
    pub s_next: Array2<T>,
    pub done: Array1<T>,
}

impl<T: Scalar> DiscreteBatch<T> {
    pub fn from_transitions(items: &[&Transition<T, usize>]) -> Self {
        let sd = items.first().map_or(0, |t| t.s.len());
        Self {
            s: stack(items.iter().map(|t| t.s.clone()), sd),
            a: items.iter().map(|t| t.a).collect(),
            r: items.iter().map(|t| t.r).collect(),
            s_next: stack(items.iter().map(|t| t.s_next.clone()), sd),
            done: items.iter().map(|t| if t.done { T::one() } else { T::zero() }).collect(),
        }
    }
}
