use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flat vector of parameter coordinates.
///
/// Every elementwise helper returns a vector of the same length as its
/// input. Binary helpers panic on length mismatch; use [`ParamVector::check_len`]
/// at API boundaries to turn a mismatch into an [`Error::Shape`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn filled(len: usize, value: f64) -> Self {
        ParamVector(vec![value; len])
    }

    /// Unit vector along coordinate `index`.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = 1.0;
        v
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn check_len(&self, expected: usize, context: &'static str) -> Result<()> {
        if self.0.len() == expected {
            Ok(())
        } else {
            Err(Error::shape(context, expected, self.0.len()))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ParamVector(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "ParamVector length mismatch");
        ParamVector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn square(&self) -> Self {
        self.map(|x| x * x)
    }

    pub fn sqrt(&self) -> Self {
        self.map(f64::sqrt)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "ParamVector length mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Index of the first non-finite coordinate, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.0.iter().position(|x| !x.is_finite())
    }

    /// (min, mean, max) over coordinates. Empty vectors give NaNs.
    pub fn summary(&self) -> (f64, f64, f64) {
        if self.0.is_empty() {
            return (f64::NAN, f64::NAN, f64::NAN);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &x in &self.0 {
            lo = lo.min(x);
            hi = hi.max(x);
            sum += x;
        }
        (lo, sum / self.0.len() as f64, hi)
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

impl From<&[f64]> for ParamVector {
    fn from(v: &[f64]) -> Self {
        ParamVector(v.to_vec())
    }
}

impl FromIterator<f64> for ParamVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        ParamVector(iter.into_iter().collect())
    }
}
