//! Flat model parameter vectors.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Flat parameter vector `W ∈ R^d`, the common currency of every update rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    values: Vec<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![T::zero(); dim],
        }
    }

    pub fn from_vec(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.values.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn check_dim(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    /// Coordinatewise `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Coordinatewise `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: T, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: T) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    pub fn fill_zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = T::zero());
    }

    pub fn norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Max absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max))
    }

    pub(crate) fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl<T> Index<usize> for ModelParams<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

impl<T: Scalar> From<Vec<T>> for ModelParams<T> {
    fn from(values: Vec<T>) -> Self {
        Self::from_vec(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_mismatch() {
        let a = ModelParams::from_vec(vec![1.0, 2.0]);
        let b = ModelParams::from_vec(vec![0.5, -1.0]);
        assert_eq!(a.sub(&b).unwrap().as_slice(), &[0.5, 3.0]);
        assert_eq!(a.add(&b).unwrap().as_slice(), &[1.5, 1.0]);
        let mut c = a.clone();
        c.add_scaled(2.0, &b).unwrap();
        assert_eq!(c.as_slice(), &[2.0, 0.0]);
        let short = ModelParams::from_vec(vec![1.0]);
        assert!(matches!(
            a.sub(&short),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn norm_and_finiteness() {
        let a = ModelParams::from_vec(vec![3.0f32, 4.0]);
        assert_eq!(a.norm(), 5.0);
        assert!(a.is_finite());
        assert!(!ModelParams::from_vec(vec![f64::NAN]).is_finite());
    }
}
