//! Desk-scale classification: data, partitions, models and local training.

pub mod data;
pub mod model;
pub mod partition;
pub mod sgd;
pub mod trainer;

pub use data::{gen_blobs, train_test_split, Dataset};
pub use model::{argmax, Batch, Model, ModelKind};
pub use partition::{entropy, partition_dirichlet, partition_iid, Partition};
pub use sgd::{evaluate, local_sgd, local_sgd_observed, Evaluation, TrainerConfig};
pub use trainer::ShardTrainer;
