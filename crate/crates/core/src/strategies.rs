//! Client-update and server-mixing rules.
//!
//! Naming of the model snapshots used throughout:
//!
//! * `end_cur`: the locally trained model after this participation's epochs,
//! * `start_cur`: the global model this participation started from,
//! * `end_prev`: the locally trained model from the previous participation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::scalar::Scalar;

pub const DEFAULT_FEDASYNC_ALPHA0: f64 = 0.6;
pub const DEFAULT_FEDASYNC_POLY_A: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    FedGsm,
    FedBuff,
    FedSat,
    FedAsync,
    FedAvg,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::FedGsm,
        StrategyKind::FedBuff,
        StrategyKind::FedSat,
        StrategyKind::FedAsync,
        StrategyKind::FedAvg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::FedGsm => "fedgsm",
            StrategyKind::FedBuff => "fedbuff",
            StrategyKind::FedSat => "fedsat",
            StrategyKind::FedAsync => "fedasync",
            StrategyKind::FedAvg => "fedavg",
        }
    }

    /// Strategies that buffer `K` client updates per global round.
    pub fn is_buffered(self) -> bool {
        matches!(self, StrategyKind::FedGsm | StrategyKind::FedBuff | StrategyKind::FedSat)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::config(
                    "fl.strategy",
                    format!("unknown strategy `{s}` (expected fedgsm|fedbuff|fedsat|fedasync|fedavg)"),
                )
            })
    }
}

/// A strategy together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy<T> {
    FedGsm,
    FedBuff,
    FedSat,
    /// Immediate staleness-damped mixing, `α = alpha0 · τ^(-poly_a)`.
    FedAsync { alpha0: T, poly_a: T },
    FedAvg,
}

impl<T: Scalar> Strategy<T> {
    pub fn from_kind(kind: StrategyKind, alpha0: T, poly_a: T) -> Self {
        match kind {
            StrategyKind::FedGsm => Strategy::FedGsm,
            StrategyKind::FedBuff => Strategy::FedBuff,
            StrategyKind::FedSat => Strategy::FedSat,
            StrategyKind::FedAsync => Strategy::FedAsync { alpha0, poly_a },
            StrategyKind::FedAvg => Strategy::FedAvg,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::FedGsm => StrategyKind::FedGsm,
            Strategy::FedBuff => StrategyKind::FedBuff,
            Strategy::FedSat => StrategyKind::FedSat,
            Strategy::FedAsync { .. } => StrategyKind::FedAsync,
            Strategy::FedAvg => StrategyKind::FedAvg,
        }
    }

    /// What a client uploads at its next visit.
    ///
    /// Buffered rules return an update direction; FedAsync and FedAvg ship the
    /// trained model itself. Without a previous end model, FedGSM and FedSat
    /// fall back to the plain local increment.
    pub fn client_payload(
        &self,
        end_cur: &ModelParams<T>,
        start_cur: &ModelParams<T>,
        end_prev: Option<&ModelParams<T>>,
    ) -> Result<ModelParams<T>> {
        match (self, end_prev) {
            (Strategy::FedGsm, Some(prev)) => fedgsm_update(end_cur, start_cur, prev),
            (Strategy::FedSat, Some(prev)) => fedsat_update(end_cur, prev),
            (Strategy::FedGsm | Strategy::FedSat | Strategy::FedBuff, _) => {
                fedbuff_update(end_cur, start_cur)
            }
            (Strategy::FedAsync { .. } | Strategy::FedAvg, _) => {
                end_cur.check_dim(start_cur)?;
                Ok(end_cur.clone())
            }
        }
    }
}

/// Staleness-compensated update `(end_cur − start_cur) + (end_cur − end_prev)`,
/// i.e. `2·end_cur − start_cur − end_prev`.
///
/// Evaluated as the sum of the local increment and the compensation term so
/// that it equals `fedbuff_update + fedsat_update` bit for bit.
pub fn fedgsm_update<T: Scalar>(
    end_cur: &ModelParams<T>,
    start_cur: &ModelParams<T>,
    end_prev: &ModelParams<T>,
) -> Result<ModelParams<T>> {
    end_cur.check_dim(start_cur)?;
    end_cur.check_dim(end_prev)?;
    Ok(ModelParams::from_vec(
        end_cur
            .iter()
            .zip(start_cur.iter())
            .zip(end_prev.iter())
            .map(|((&e, &s), &p)| (e - s) + (e - p))
            .collect(),
    ))
}

/// Plain local increment `end_cur − start_cur`.
pub fn fedbuff_update<T: Scalar>(
    end_cur: &ModelParams<T>,
    start_cur: &ModelParams<T>,
) -> Result<ModelParams<T>> {
    end_cur.sub(start_cur)
}

/// Change between consecutive local end models, `end_cur − end_prev`.
pub fn fedsat_update<T: Scalar>(
    end_cur: &ModelParams<T>,
    end_prev: &ModelParams<T>,
) -> Result<ModelParams<T>> {
    end_cur.sub(end_prev)
}

/// Polynomial staleness damping `alpha0 · τ^(-poly_a)`.
pub fn fedasync_alpha<T: Scalar>(staleness: u64, alpha0: T, poly_a: T) -> T {
    let tau = T::lit(staleness.max(1) as f64);
    alpha0 * tau.powf(-poly_a)
}

/// `(1 − α)·global + α·local_end` with staleness-damped `α`.
pub fn fedasync_mix<T: Scalar>(
    global: &ModelParams<T>,
    local_end: &ModelParams<T>,
    staleness: u64,
    alpha0: T,
    poly_a: T,
) -> Result<ModelParams<T>> {
    let alpha = fedasync_alpha(staleness, alpha0, poly_a);
    global.zip_map(local_end, |g, l| (T::one() - alpha) * g + alpha * l)
}

/// Importance-weighted average `Σ p_n W_n / Σ p_n` of client models.
pub fn weighted_average<'a, T: Scalar>(
    models: impl IntoIterator<Item = (T, &'a ModelParams<T>)>,
) -> Result<ModelParams<T>> {
    let mut iter = models.into_iter();
    let (w0, m0) = iter
        .next()
        .ok_or_else(|| Error::InvalidData("weighted average of no models".into()))?;
    let mut acc = m0.clone();
    acc.scale(w0);
    let mut total = w0;
    for (w, m) in iter {
        acc.add_scaled(w, m)?;
        total += w;
    }
    acc.scale(T::one() / total);
    Ok(acc)
}
