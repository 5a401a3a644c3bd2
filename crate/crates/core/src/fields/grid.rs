use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Spectral;

/// Uniform cell-centered grid on an axis-aligned box, row-major with axis 0 slowest.
///
/// Node `i` along an axis sits at `lo + (i + 1/2) h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridSpec {
    pub fn new(dims: Vec<usize>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() != lo.len() || dims.len() != hi.len() {
            return Err(Error::DimensionMismatch("grid dims and box extents disagree".into()));
        }
        for &n in &dims {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::InvalidArgument(format!("grid size {n} must be a power of two >= 8")));
            }
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidArgument(format!("bad box extent [{a}, {b}]")));
            }
        }
        Ok(Self { dims, lo, hi })
    }

    /// The periodic cell `Q = (-1/2, 1/2)^n` with `size` points per axis.
    pub fn unit_cube(n: usize, size: usize) -> Result<Self> {
        Self::cube(n, size, -0.5, 0.5)
    }

    pub fn cube(n: usize, size: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![size; n], vec![lo; n], vec![hi; n])
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }
    pub fn extents(&self) -> Vec<f64> {
        (0..self.n()).map(|a| self.extent(a)).collect()
    }
    pub fn h(&self, axis: usize) -> f64 {
        self.extent(axis) / self.dims[axis] as f64
    }
    /// Largest mesh width over the axes.
    pub fn h_max(&self) -> f64 {
        (0..self.n()).map(|a| self.h(a)).fold(0.0, f64::max)
    }
    pub fn cell_volume(&self) -> f64 {
        (0..self.n()).map(|a| self.h(a)).product()
    }
    pub fn volume(&self) -> f64 {
        self.extents().iter().product()
    }

    pub fn is_unit_cube(&self) -> bool {
        self.lo.iter().all(|&v| v == -0.5) && self.hi.iter().all(|&v| v == 0.5)
    }

    pub fn multi_index(&self, mut flat: usize, idx: &mut [usize]) {
        for a in (0..self.n()).rev() {
            idx[a] = flat % self.dims[a];
            flat /= self.dims[a];
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn node_into(&self, flat: usize, x: &mut [f64]) {
        let mut f = flat;
        for a in (0..self.n()).rev() {
            let i = f % self.dims[a];
            f /= self.dims[a];
            x[a] = self.lo[a] + (i as f64 + 0.5) * self.h(a);
        }
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        self.node_into(flat, &mut x);
        x
    }

    /// Coordinates of all nodes, flattened node-major.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; self.len() * n];
        for (flat, x) in out.chunks_exact_mut(n).enumerate() {
            self.node_into(flat, x);
        }
        out
    }

    pub fn spectral(&self) -> Spectral {
        Spectral::new(&self.dims, &self.extents())
    }

    /// Same box with every axis refined by `factor` (a power of two).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.dims.iter().map(|&d| d * factor).collect(), self.lo.clone(), self.hi.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridSpec::unit_cube(2, 12).is_err());
        assert!(GridSpec::unit_cube(2, 4).is_err());
        assert!(GridSpec::new(vec![8], vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn index_roundtrip_and_nodes() {
        let g = GridSpec::new(vec![8, 16, 8], vec![-1.0, 0.0, -0.5], vec![1.0, 2.0, 0.5]).unwrap();
        let mut idx = [0; 3];
        for flat in [0, 5, 77, g.len() - 1] {
            g.multi_index(flat, &mut idx);
            assert_eq!(g.flat_index(&idx), flat);
        }
        assert_eq!(g.node(0), vec![-0.875, 0.0625, -0.4375]);
        assert!((g.cell_volume() * g.len() as f64 - g.volume()).abs() < 1e-12);
    }
}
