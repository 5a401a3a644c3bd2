use super::SampledField;
use crate::error::{Error, Result};

/// A field known at arbitrary weighted quadrature points.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadField {
    n: usize,
    m: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl QuadField {
    pub fn new(n: usize, m: usize, points: Vec<f64>, weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let len = weights.len();
        if n == 0 || m == 0 || points.len() != len * n || values.len() != len * m {
            return Err(Error::DimensionMismatch("quadrature arrays have inconsistent lengths".into()));
        }
        if values.iter().chain(&points).chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quadrature field".into()));
        }
        Ok(Self { n, m, points, weights, values })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn points(&self) -> &[f64] {
        &self.points
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SampledField for QuadField {
    fn dim(&self) -> usize {
        self.n
    }
    fn components(&self) -> usize {
        self.m
    }
    fn for_each_sample(&self, f: &mut dyn FnMut(&[f64], &[f64], f64)) {
        for ((x, v), &w) in self.points.chunks_exact(self.n).zip(self.values.chunks_exact(self.m)).zip(&self.weights) {
            f(x, v, w);
        }
    }
}
