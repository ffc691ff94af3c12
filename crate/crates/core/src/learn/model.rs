//! Softmax regression and a one-hidden-layer tanh MLP over flat parameters.
//!
//! Parameter layouts (row-major weight matrices):
//!
//! * `softmax_linear`: `W (C×D)`, `b (C)`
//! * `mlp1`: `W1 (H×D)`, `b1 (H)`, `W2 (C×H)`, `b2 (C)`

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::scalar::Scalar;

pub const INIT_SCALE: f64 = 0.05;
pub const DEFAULT_HIDDEN_WIDTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SoftmaxLinear,
    Mlp1,
}

/// Architecture of a classifier: kind plus input/hidden/output widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Model {
    pub kind: ModelKind,
    pub dim: usize,
    pub classes: usize,
    pub hidden: usize,
}

/// Borrowed view of selected rows of a dataset.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a, T> {
    pub data: &'a Dataset<T>,
    pub indices: &'a [usize],
}

impl<'a, T> Batch<'a, T> {
    pub fn new(data: &'a Dataset<T>, indices: &'a [usize]) -> Self {
        Self { data, indices }
    }
}

impl Model {
    pub fn softmax_linear(dim: usize, classes: usize) -> Self {
        Self {
            kind: ModelKind::SoftmaxLinear,
            dim,
            classes,
            hidden: 0,
        }
    }

    pub fn mlp1(dim: usize, hidden: usize, classes: usize) -> Self {
        Self {
            kind: ModelKind::Mlp1,
            dim,
            classes,
            hidden,
        }
    }

    pub fn num_params(&self) -> usize {
        let (d, h, c) = (self.dim, self.hidden, self.classes);
        match self.kind {
            ModelKind::SoftmaxLinear => c * d + c,
            ModelKind::Mlp1 => d * h + h + h * c + c,
        }
    }

    /// Weights uniform in `[-0.05, 0.05]`, biases zero.
    pub fn init_params<T: Scalar>(&self, rng: &mut impl Rng) -> ModelParams<T> {
        let mut w = vec![T::zero(); self.num_params()];
        let mut fill = |range: std::ops::Range<usize>| {
            for v in &mut w[range] {
                *v = T::lit(rng.random_range(-INIT_SCALE..=INIT_SCALE));
            }
        };
        let (d, h, c) = (self.dim, self.hidden, self.classes);
        match self.kind {
            ModelKind::SoftmaxLinear => fill(0..c * d),
            ModelKind::Mlp1 => {
                fill(0..h * d);
                let w2 = h * d + h;
                fill(w2..w2 + c * h);
            }
        }
        ModelParams::from_vec(w)
    }

    fn check(&self, params: &ModelParams<impl Scalar>, data_dim: usize, data_classes: usize) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: params.len(),
            });
        }
        if data_dim != self.dim || data_classes != self.classes {
            return Err(Error::InvalidData(format!(
                "model expects {}x{} data, got {}x{}",
                self.dim, self.classes, data_dim, data_classes
            )));
        }
        if !params.is_finite() {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(())
    }

    /// Forward pass for one sample. `hidden` receives the tanh activations for
    /// `mlp1` and is untouched otherwise.
    fn forward<T: Scalar>(&self, w: &[T], x: &[T], hidden: &mut [T], logits: &mut [T]) {
        let (d, h, c) = (self.dim, self.hidden, self.classes);
        match self.kind {
            ModelKind::SoftmaxLinear => affine(&w[..c * d], &w[c * d..c * d + c], x, logits),
            ModelKind::Mlp1 => {
                let (w1, rest) = w.split_at(h * d);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(c * h);
                affine(w1, b1, x, hidden);
                hidden.iter_mut().for_each(|a| *a = a.tanh());
                affine(w2, b2, hidden, logits);
            }
        }
    }

    /// Raw class scores for one feature row.
    pub fn logits<T: Scalar>(&self, params: &ModelParams<T>, x: &[T]) -> Vec<T> {
        let mut hidden = vec![T::zero(); self.hidden];
        let mut logits = vec![T::zero(); self.classes];
        self.forward(params.as_slice(), x, &mut hidden, &mut logits);
        logits
    }

    /// Mean cross-entropy over the batch and its exact gradient.
    pub fn loss_and_grad<T: Scalar>(
        &self,
        params: &ModelParams<T>,
        batch: Batch<'_, T>,
    ) -> Result<(T, ModelParams<T>)> {
        self.check(params, batch.data.dim(), batch.data.classes())?;
        if batch.indices.is_empty() {
            return Err(Error::InvalidData("empty batch".into()));
        }
        let (d, h, c) = (self.dim, self.hidden, self.classes);
        let w = params.as_slice();
        let mut grad = vec![T::zero(); w.len()];
        let mut hidden = vec![T::zero(); h];
        let mut logits = vec![T::zero(); c];
        let mut dz = vec![T::zero(); c];
        let mut da = vec![T::zero(); h];
        let mut loss = T::zero();

        for &i in batch.indices {
            let x = batch.data.row(i);
            let y = batch.data.label(i);
            self.forward(w, x, &mut hidden, &mut logits);
            let lse = log_sum_exp(&logits);
            loss += lse - logits[y];
            for (k, g) in dz.iter_mut().enumerate() {
                *g = (logits[k] - lse).exp();
            }
            dz[y] -= T::one();

            match self.kind {
                ModelKind::SoftmaxLinear => {
                    let (gw, gb) = grad.split_at_mut(c * d);
                    outer_acc(gw, &dz, x);
                    add_acc(gb, &dz);
                }
                ModelKind::Mlp1 => {
                    let w2 = &w[h * d + h..h * d + h + c * h];
                    let (g1, rest) = grad.split_at_mut(h * d);
                    let (gb1, rest) = rest.split_at_mut(h);
                    let (g2, gb2) = rest.split_at_mut(c * h);
                    outer_acc(g2, &dz, &hidden);
                    add_acc(gb2, &dz);
                    // Back through W2 and tanh.
                    for (j, a) in da.iter_mut().enumerate() {
                        let back: T = (0..c).map(|k| w2[k * h + j] * dz[k]).sum();
                        *a = back * (T::one() - hidden[j] * hidden[j]);
                    }
                    outer_acc(g1, &da, x);
                    add_acc(gb1, &da);
                }
            }
        }

        let inv = T::one() / T::from_count(batch.indices.len());
        grad.iter_mut().for_each(|g| *g *= inv);
        Ok((loss * inv, ModelParams::from_vec(grad)))
    }

    /// Mean cross-entropy only.
    pub fn loss<T: Scalar>(&self, params: &ModelParams<T>, batch: Batch<'_, T>) -> Result<T> {
        self.check(params, batch.data.dim(), batch.data.classes())?;
        let mut hidden = vec![T::zero(); self.hidden];
        let mut logits = vec![T::zero(); self.classes];
        let mut loss = T::zero();
        for &i in batch.indices {
            self.forward(params.as_slice(), batch.data.row(i), &mut hidden, &mut logits);
            loss += log_sum_exp(&logits) - logits[batch.data.label(i)];
        }
        Ok(loss / T::from_count(batch.indices.len().max(1)))
    }
}

/// `out = W x + b` with `W` of shape `out.len() × x.len()`.
fn affine<T: Scalar>(w: &[T], b: &[T], x: &[T], out: &mut [T]) {
    let n = x.len();
    for (k, o) in out.iter_mut().enumerate() {
        let row = &w[k * n..(k + 1) * n];
        *o = b[k] + row.iter().zip(x).map(|(&a, &v)| a * v).sum::<T>();
    }
}

/// `g += u vᵀ`.
fn outer_acc<T: Scalar>(g: &mut [T], u: &[T], v: &[T]) {
    let n = v.len();
    for (k, &uk) in u.iter().enumerate() {
        for (gj, &vj) in g[k * n..(k + 1) * n].iter_mut().zip(v) {
            *gj += uk * vj;
        }
    }
}

fn add_acc<T: Scalar>(g: &mut [T], u: &[T]) {
    g.iter_mut().zip(u).for_each(|(a, &b)| *a += b);
}

pub(crate) fn log_sum_exp<T: Scalar>(z: &[T]) -> T {
    let m = z.iter().copied().fold(T::neg_infinity(), T::max);
    m + z.iter().map(|&v| (v - m).exp()).sum::<T>().ln()
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax<T: Scalar>(z: &[T]) -> usize {
    let mut best = 0;
    for (k, &v) in z.iter().enumerate().skip(1) {
        if v > z[best] {
            best = k;
        }
    }
    best
}
