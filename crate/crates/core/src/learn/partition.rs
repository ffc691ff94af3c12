//! Splitting a training set across satellites with uniform data volume.

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-client index lists into a parent dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignments: Vec<Vec<usize>>,
}

impl Partition {
    pub fn from_assignments(assignments: Vec<Vec<usize>>) -> Self {
        Self { assignments }
    }

    pub fn clients(&self) -> usize {
        self.assignments.len()
    }

    pub fn shard(&self, client: usize) -> &[usize] {
        &self.assignments[client]
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    /// `d_n` for every client.
    pub fn volumes(&self) -> Vec<usize> {
        self.assignments.iter().map(Vec::len).collect()
    }

    /// Importance weights `p_n = d_n / Σ d_n`.
    pub fn importances<T: Scalar>(&self) -> Vec<T> {
        let total = T::from_count(self.assignments.iter().map(Vec::len).sum());
        self.assignments
            .iter()
            .map(|a| T::from_count(a.len()) / total)
            .collect()
    }

    /// Class-proportion vector of each client's shard.
    pub fn class_proportions<T: Scalar>(&self, ds: &Dataset<T>) -> Vec<Vec<f64>> {
        self.assignments
            .iter()
            .map(|a| {
                let n = a.len().max(1) as f64;
                ds.class_counts(a).into_iter().map(|c| c as f64 / n).collect()
            })
            .collect()
    }
}

/// Shannon entropy (nats) of a probability vector.
pub fn entropy(proportions: &[f64]) -> f64 {
    proportions
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

fn check_clients(n_samples: usize, clients: usize) -> Result<usize> {
    if clients == 0 {
        return Err(Error::InvalidData("partition needs at least one client".into()));
    }
    if clients > n_samples {
        return Err(Error::InvalidData(format!(
            "{clients} clients exceed {n_samples} samples"
        )));
    }
    Ok(n_samples / clients)
}

/// Uniform shuffle cut into equal contiguous slices; any remainder is trimmed
/// from the end of the shuffle.
pub fn partition_iid<T: Scalar>(ds: &Dataset<T>, clients: usize, seed: u64) -> Result<Partition> {
    let quota = check_clients(ds.len(), clients)?;
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.truncate(quota * clients);
    Ok(Partition {
        assignments: order.chunks(quota).map(<[usize]>::to_vec).collect(),
    })
}

/// Label-skewed split: client `n` draws class proportions `q_n ~ Dir(β·1)` and
/// fills a fixed quota of `⌊n_samples / N⌋` by sampling a class from `q_n`
/// and popping a sample from that class's shuffled pool. An exhausted pool
/// redirects to the largest remaining pool (lowest class index on ties).
pub fn partition_dirichlet<T: Scalar>(
    ds: &Dataset<T>,
    clients: usize,
    beta: f64,
    seed: u64,
) -> Result<Partition> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidData(format!("Dirichlet beta {beta} must be positive")));
    }
    let quota = check_clients(ds.len(), clients)?;
    let classes = ds.classes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for i in 0..ds.len() {
        pools[ds.label(i)].push(i);
    }
    for pool in &mut pools {
        pool.shuffle(&mut rng);
    }

    let gamma = Gamma::new(beta, 1.0).map_err(|e| Error::InvalidData(e.to_string()))?;
    let mut assignments = Vec::with_capacity(clients);
    for _ in 0..clients {
        let mut q: Vec<f64> = (0..classes).map(|_| gamma.sample(&mut rng)).collect();
        let total: f64 = q.iter().sum();
        if total > 0.0 && total.is_finite() {
            q.iter_mut().for_each(|v| *v /= total);
        } else {
            // Every gamma draw underflowed; treat as uniform.
            q.iter_mut().for_each(|v| *v = 1.0 / classes as f64);
        }
        let pick = WeightedIndex::new(&q).map_err(|e| Error::InvalidData(e.to_string()))?;

        let mut shard = Vec::with_capacity(quota);
        while shard.len() < quota {
            let mut class = pick.sample(&mut rng);
            if pools[class].is_empty() {
                class = largest_pool(&pools);
            }
            // Pools jointly hold at least `quota * clients` samples, so the
            // fallback pool is never empty here.
            shard.push(pools[class].pop().expect("fallback pool is non-empty"));
        }
        assignments.push(shard);
    }
    Ok(Partition { assignments })
}

fn largest_pool(pools: &[Vec<usize>]) -> usize {
    let mut best = 0;
    for (c, pool) in pools.iter().enumerate() {
        if pool.len() > pools[best].len() {
            best = c;
        }
    }
    best
}
