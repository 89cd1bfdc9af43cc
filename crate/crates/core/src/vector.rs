//! Dense real vectors in `ℝᵈ`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or direction in `ℝᵈ`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Vector(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    /// `self + alpha * other`
    pub fn add_scaled(&self, alpha: f64, other: &[f64]) -> Vector {
        debug_assert_eq!(self.dim(), other.len());
        Vector(self.0.iter().zip(other).map(|(a, b)| a + alpha * b).collect())
    }

    pub fn sub(&self, other: &[f64]) -> Vector {
        self.add_scaled(-1.0, other)
    }

    pub fn scaled(&self, alpha: f64) -> Vector {
        Vector(self.0.iter().map(|a| alpha * a).collect())
    }

    pub fn distance_sq(&self, other: &[f64]) -> f64 {
        debug_assert_eq!(self.dim(), other.len());
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        debug_assert_eq!(self.dim(), other.len());
        libm::sqrt(
            self.0
                .iter()
                .zip(other)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Fails unless `self` has dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        check_dim(&self.0, dim)
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn check_dim(a: &[f64], dim: usize) -> Result<()> {
    if a.len() == dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: dim,
            found: a.len(),
        })
    }
}

/// Componentwise arithmetic mean of a nonempty list of equal-length vectors.
pub fn mean<'a, I>(vectors: I) -> Result<Vector>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut iter = vectors.into_iter();
    let first = iter.next().ok_or(Error::EmptyInput("mean of no vectors"))?;
    let mut acc = first.to_vec();
    let mut count = 1usize;
    for v in iter {
        check_dim(v, acc.len())?;
        for (a, b) in acc.iter_mut().zip(v) {
            *a += b;
        }
        count += 1;
    }
    let inv = 1.0 / count as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    Ok(Vector(acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_arithmetic() {
        let v = Vector::from([3.0, 4.0]);
        assert_eq!(v.norm(), 5.0);
        assert_eq!(v.add_scaled(2.0, &[1.0, 1.0]).as_slice(), &[5.0, 6.0]);
        assert_eq!(v.distance(&[0.0, 0.0]), 5.0);
        assert_eq!(v.check_dim(3), Err(Error::DimensionMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn mean_rejects_empty() {
        let none: [&[f64]; 0] = [];
        assert!(matches!(mean(none), Err(Error::EmptyInput(_))));
    }
}
