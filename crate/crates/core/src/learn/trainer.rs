//! Per-satellite local trainer over a partitioned training set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::Dataset;
use super::model::Model;
use super::partition::Partition;
use super::sgd::{local_sgd, TrainerConfig};
use crate::error::{Error, Result};
use crate::flcore::LocalTrainer;
use crate::params::ModelParams;
use crate::scalar::Scalar;

/// Runs [`local_sgd`] on each client's shard with that client's own shuffle
/// stream, so results depend only on the client's history.
#[derive(Debug, Clone)]
pub struct ShardTrainer<T> {
    model: Model,
    data: Dataset<T>,
    partition: Partition,
    cfg: TrainerConfig<T>,
    rngs: Vec<ChaCha8Rng>,
}

impl<T: Scalar> ShardTrainer<T> {
    /// `client_seeds[n]` seeds client `n`'s batch-shuffle stream.
    pub fn new(
        model: Model,
        data: Dataset<T>,
        partition: Partition,
        cfg: TrainerConfig<T>,
        client_seeds: &[u64],
    ) -> Result<Self> {
        if client_seeds.len() != partition.clients() {
            return Err(Error::InvalidData(format!(
                "{} client seeds for {} shards",
                client_seeds.len(),
                partition.clients()
            )));
        }
        cfg.validate()?;
        Ok(Self {
            model,
            data,
            partition,
            cfg,
            rngs: client_seeds.iter().map(|&s| ChaCha8Rng::seed_from_u64(s)).collect(),
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }
}

impl<T: Scalar> LocalTrainer<T> for ShardTrainer<T> {
    fn train(&mut self, client: usize, start: &ModelParams<T>, participation: u32) -> Result<ModelParams<T>> {
        let rng = self
            .rngs
            .get_mut(client)
            .ok_or_else(|| Error::InvalidData(format!("no shard for client {client}")))?;
        local_sgd(
            &self.model,
            start,
            &self.data,
            self.partition.shard(client),
            &self.cfg,
            participation,
            rng,
        )
    }
}
