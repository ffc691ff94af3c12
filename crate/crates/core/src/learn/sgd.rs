//! Local minibatch SGD and evaluation.

use rand::seq::SliceRandom;
use rand::Rng;

use super::data::Dataset;
use super::model::{argmax, log_sum_exp, Batch, Model};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainerConfig<T> {
    /// Local epochs `E` per participation.
    pub epochs: usize,
    pub batch_size: usize,
    /// Initial local learning rate.
    pub eta_l0: T,
    /// Multiplicative decay per participation round.
    pub lr_decay: T,
}

impl<T: Scalar> TrainerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::config("trainer.batch_size", "must be at least 1"));
        }
        if !(self.eta_l0 >= T::zero() && self.eta_l0.is_finite()) {
            return Err(Error::config("trainer.eta_l0", "must be finite and non-negative"));
        }
        if !(self.lr_decay > T::zero() && self.lr_decay <= T::one()) {
            return Err(Error::config("trainer.lr_decay", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// `eta_l0 · lr_decay^round_counter`.
    pub fn learning_rate(&self, round_counter: u32) -> T {
        self.eta_l0 * self.lr_decay.powi(round_counter as i32)
    }
}

/// `E` epochs of shuffled minibatch SGD starting from `params0`.
///
/// The last short batch of an epoch is kept. Samples inside a batch are
/// visited in ascending index order, so with a single full batch the result
/// does not depend on the shuffle.
pub fn local_sgd<T: Scalar>(
    model: &Model,
    params0: &ModelParams<T>,
    data: &Dataset<T>,
    shard: &[usize],
    cfg: &TrainerConfig<T>,
    round_counter: u32,
    rng: &mut impl Rng,
) -> Result<ModelParams<T>> {
    local_sgd_observed(model, params0, data, shard, cfg, round_counter, rng, |_, _| {})
}

/// [`local_sgd`] that reports every step's `(loss, gradient)` to `observe`.
#[allow(clippy::too_many_arguments)]
pub fn local_sgd_observed<T: Scalar>(
    model: &Model,
    params0: &ModelParams<T>,
    data: &Dataset<T>,
    shard: &[usize],
    cfg: &TrainerConfig<T>,
    round_counter: u32,
    rng: &mut impl Rng,
    mut observe: impl FnMut(T, &ModelParams<T>),
) -> Result<ModelParams<T>> {
    let mut params = params0.clone();
    if cfg.epochs == 0 {
        return Ok(params);
    }
    cfg.validate()?;
    if shard.is_empty() {
        return Err(Error::InvalidData("local training on an empty shard".into()));
    }
    let lr = cfg.learning_rate(round_counter);
    let mut order = shard.to_vec();
    let mut batch = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend_from_slice(chunk);
            batch.sort_unstable();
            let (loss, grad) = model.loss_and_grad(&params, Batch::new(data, &batch))?;
            if !loss.is_finite() {
                return Err(Error::NonFinite("training loss".into()));
            }
            observe(loss, &grad);
            params.add_scaled(-lr, &grad)?;
        }
    }
    if !params.is_finite() {
        return Err(Error::NonFinite("locally trained parameters".into()));
    }
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Fraction of argmax-correct predictions, in `[0, 1]`.
    pub accuracy: f64,
    /// Mean cross-entropy.
    pub loss: f64,
}

/// Accuracy and mean loss over the whole test set, in row order.
pub fn evaluate<T: Scalar>(model: &Model, params: &ModelParams<T>, test: &Dataset<T>) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::InvalidData("empty test set".into()));
    }
    if params.len() != model.num_params() {
        return Err(Error::DimensionMismatch {
            expected: model.num_params(),
            found: params.len(),
        });
    }
    let mut correct = 0usize;
    let mut loss = T::zero();
    for i in 0..test.len() {
        let z = model.logits(params, test.row(i));
        let y = test.label(i);
        if argmax(&z) == y {
            correct += 1;
        }
        loss += log_sum_exp(&z) - z[y];
    }
    Ok(Evaluation {
        accuracy: correct as f64 / test.len() as f64,
        loss: (loss / T::from_count(test.len())).as_f64(),
    })
}
