use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Quadrature;

/// A function on [-1, 1] stored by its values at the nodes of a quadrature rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFn(Vec<f64>);

impl GridFn {
    pub fn new(values: Vec<f64>) -> Self {
        GridFn(values)
    }

    /// Samples `f` at the nodes of `q`.
    pub fn sample(q: &Quadrature, f: impl Fn(f64) -> f64) -> Self {
        GridFn(q.nodes().iter().map(|&z| f(z)).collect())
    }

    pub fn constant(q: &Quadrature, c: f64) -> Self {
        GridFn(vec![c; q.len()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFn(self.0.iter().map(|&x| f(x)).collect())
    }

    /// Pointwise combination with another function on the same nodes.
    pub fn zip_with(&self, other: &GridFn, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        GridFn(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub(crate) fn check_on(&self, q: &Quadrature) -> Result<()> {
        if self.len() != q.len() {
            return Err(Error::Shape {
                expected: q.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for GridFn {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for GridFn {
    fn from(v: Vec<f64>) -> Self {
        GridFn(v)
    }
}
