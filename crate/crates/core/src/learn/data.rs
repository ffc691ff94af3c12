//! Synthetic classification datasets.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense labelled samples, features stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    features: Vec<T>,
    labels: Vec<usize>,
    dim: usize,
    classes: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(features: Vec<T>, labels: Vec<usize>, dim: usize, classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidData("dataset has no samples".into()));
        }
        if dim == 0 || features.len() != labels.len() * dim {
            return Err(Error::InvalidData(format!(
                "{} feature values do not form {} rows of width {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::InvalidData(format!("label {bad} outside [0, {classes})")));
        }
        Ok(Self {
            features,
            labels,
            dim,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Copies the given rows, in the given order, into a new dataset.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::new(features, labels, self.dim, self.classes)
    }

    /// Per-class sample counts over `indices`.
    pub fn class_counts(&self, indices: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &i in indices {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    /// Writes `label,f0,f1,...` rows with six-decimal fixed-point features.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let header: Vec<String> = std::iter::once("label".to_string())
            .chain((0..self.dim).map(|j| format!("f{j}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.len() {
            write!(out, "{}", self.labels[i])?;
            for v in self.row(i) {
                write!(out, ",{:.6}", v.as_f64())?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Mean of class `c`: a one-hot lattice point scaled so neighbouring class
/// means sit at unit distance. Classes beyond `dim` wrap onto outer shells.
fn class_mean(c: usize, dim: usize) -> (usize, f64) {
    let shell = (c / dim + 1) as f64;
    (c % dim, shell * std::f64::consts::FRAC_1_SQRT_2)
}

/// Balanced Gaussian blobs: sample `i` has label `i mod C` and features drawn
/// around its class mean with isotropic standard deviation `spread / sqrt(dim)`
/// per coordinate.
pub fn gen_blobs<T: Scalar>(
    n_samples: usize,
    classes: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset<T>> {
    if classes < 2 {
        return Err(Error::InvalidData("need at least two classes".into()));
    }
    if dim < 2 {
        return Err(Error::InvalidData("need at least two feature dimensions".into()));
    }
    if n_samples < classes {
        return Err(Error::InvalidData(format!(
            "{n_samples} samples cannot cover {classes} classes"
        )));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::InvalidData(format!("spread {spread} must be finite and >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = spread / (dim as f64).sqrt();
    let mut features = Vec::with_capacity(n_samples * dim);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let c = i % classes;
        let (axis, height) = class_mean(c, dim);
        for j in 0..dim {
            let noise: f64 = StandardNormal.sample(&mut rng);
            let mean = if j == axis { height } else { 0.0 };
            features.push(T::lit(mean + sigma * noise));
        }
        labels.push(c);
    }
    Dataset::new(features, labels, dim, classes)
}

/// Seeded shuffle split into `(train, test)` with `round(n · test_fraction)`
/// test rows.
pub fn train_test_split<T: Scalar>(
    ds: &Dataset<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidData(format!(
            "test fraction {test_fraction} must lie in (0, 1)"
        )));
    }
    let n_test = ((ds.len() as f64) * test_fraction).round() as usize;
    if n_test == 0 || n_test >= ds.len() {
        return Err(Error::InvalidData(format!(
            "test fraction {test_fraction} leaves an empty split of {} samples",
            ds.len()
        )));
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test, train) = order.split_at(n_test);
    Ok((ds.subset(train)?, ds.subset(test)?))
}
