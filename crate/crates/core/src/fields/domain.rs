use serde::{Deserialize, Serialize};

use super::{GridSpec, SampledField};
use crate::error::{Error, Result};

/// Shape of a bounded domain represented by a node mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// Open ball (a disk for n = 2).
    Ball { center: Vec<f64>, radius: f64 },
    /// `{x : |x - c| < r, (x - c) . normal < 0}`.
    HalfBall { center: Vec<f64>, radius: f64, normal: Vec<f64> },
    /// Open box.
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    /// Explicit mask with no analytic description.
    Mask,
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        DomainSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            DomainSpec::Ball { center, .. } | DomainSpec::HalfBall { center, .. } => Some(center.len()),
            DomainSpec::Rect { lo, .. } => Some(lo.len()),
            DomainSpec::Mask => None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainSpec::Ball { center, radius } => dist2(x, center) < radius * radius,
            DomainSpec::HalfBall { center, radius, normal } => {
                dist2(x, center) < radius * radius
                    && x.iter().zip(center).zip(normal).map(|((a, c), n)| (a - c) * n).sum::<f64>() < 0.0
            }
            DomainSpec::Rect { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| v > a && v < b),
            DomainSpec::Mask => true,
        }
    }

    /// Bounding box of the domain.
    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            DomainSpec::Ball { center, radius } | DomainSpec::HalfBall { center, radius, .. } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            DomainSpec::Rect { lo, hi } => Some((lo.clone(), hi.clone())),
            DomainSpec::Mask => None,
        }
    }

    /// Grid on the bounding box enlarged by `margin` times its extent on every side.
    pub fn grid(&self, size: usize, margin: f64) -> Result<GridSpec> {
        let (lo, hi) = self
            .bounds()
            .ok_or_else(|| Error::InvalidArgument("explicit masks carry no bounding box".into()))?;
        let (lo, hi): (Vec<f64>, Vec<f64>) = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| {
                let pad = margin * (b - a);
                (a - pad, b + pad)
            })
            .unzip();
        GridSpec::new(vec![size; lo.len()], lo, hi)
    }

    pub fn mask(&self, grid: &GridSpec) -> Vec<bool> {
        let mut x = vec![0.0; grid.n()];
        (0..grid.len())
            .map(|flat| {
                grid.node_into(flat, &mut x);
                self.contains(&x)
            })
            .collect()
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A field on a bounding-box grid that vanishes outside a node mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainField {
    grid: GridSpec,
    m: usize,
    mask: Vec<bool>,
    values: Vec<f64>,
    domain: DomainSpec,
}

impl DomainField {
    pub fn new(grid: GridSpec, m: usize, mask: Vec<bool>, values: Vec<f64>, domain: DomainSpec) -> Result<Self> {
        if mask.len() != grid.len() || m == 0 || values.len() != grid.len() * m {
            return Err(Error::DimensionMismatch("mask or values do not match the grid".into()));
        }
        if !mask.iter().any(|&b| b) {
            return Err(Error::InvalidArgument("domain mask is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("domain field values".into()));
        }
        for (node, &inside) in values.chunks_exact(m).zip(&mask) {
            if !inside && node.iter().any(|&v| v != 0.0) {
                return Err(Error::Support("field does not vanish outside the domain mask".into()));
            }
        }
        Ok(Self { grid, m, mask, values, domain })
    }

    pub fn from_fn(domain: DomainSpec, grid: GridSpec, m: usize, f: impl Fn(&[f64], &mut [f64])) -> Result<Self> {
        let mask = domain.mask(&grid);
        Self::from_fn_masked(domain, grid, m, mask, f)
    }

    pub fn from_fn_masked(
        domain: DomainSpec,
        grid: GridSpec,
        m: usize,
        mask: Vec<bool>,
        f: impl Fn(&[f64], &mut [f64]),
    ) -> Result<Self> {
        let mut values = vec![0.0; grid.len() * m];
        let mut x = vec![0.0; grid.n()];
        for (flat, out) in values.chunks_exact_mut(m).enumerate() {
            if mask[flat] {
                grid.node_into(flat, &mut x);
                f(&x, out);
            }
        }
        Self::new(grid, m, mask, values, domain)
    }

    pub fn zeros(domain: DomainSpec, grid: GridSpec, m: usize) -> Result<Self> {
        Self::from_fn(domain, grid, m, |_, o| o.fill(0.0))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    /// Volume of the domain estimated by node counting.
    pub fn measure(&self) -> f64 {
        self.mask.iter().filter(|&&b| b).count() as f64 * self.grid.cell_volume()
    }

    /// Nodes of the mask within `width` (in units of the largest mesh width)
    /// of a mask transition, measured in index space.
    pub fn boundary_band(&self, width: f64) -> Vec<bool> {
        let n = self.grid.n();
        let steps = width.ceil().max(1.0) as isize;
        let mut idx = vec![0usize; n];
        let mut probe = vec![0usize; n];
        (0..self.grid.len())
            .map(|flat| {
                if !self.mask[flat] {
                    return false;
                }
                self.grid.multi_index(flat, &mut idx);
                for a in 0..n {
                    for s in 1..=steps {
                        for sign in [-1isize, 1] {
                            let j = idx[a] as isize + sign * s;
                            if j < 0 || j >= self.grid.dims[a] as isize {
                                return true;
                            }
                            probe.copy_from_slice(&idx);
                            probe[a] = j as usize;
                            if !self.mask[self.grid.flat_index(&probe)] {
                                return true;
                            }
                        }
                    }
                }
                false
            })
            .collect()
    }

    /// Multiplies by a scalar function, keeping the mask.
    pub fn scaled_by(&self, eta: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut values = self.values.clone();
        let mut x = vec![0.0; self.grid.n()];
        for (flat, node) in values.chunks_exact_mut(self.m).enumerate() {
            if self.mask[flat] {
                self.grid.node_into(flat, &mut x);
                let s = eta(&x);
                node.iter_mut().for_each(|v| *v *= s);
            }
        }
        Self::new(self.grid.clone(), self.m, self.mask.clone(), values, self.domain.clone())
    }

    /// Same values viewed on a larger mask that contains this one.
    pub fn with_mask(&self, mask: Vec<bool>, domain: DomainSpec) -> Result<Self> {
        if mask.len() != self.mask.len() || self.mask.iter().zip(&mask).any(|(&a, &b)| a && !b) {
            return Err(Error::InvalidArgument("new mask must contain the old one".into()));
        }
        Self::new(self.grid.clone(), self.m, mask, self.values.clone(), domain)
    }
}

impl SampledField for DomainField {
    fn dim(&self) -> usize {
        self.grid.n()
    }
    fn components(&self) -> usize {
        self.m
    }
    fn for_each_sample(&self, f: &mut dyn FnMut(&[f64], &[f64], f64)) {
        let w = self.grid.cell_volume();
        let mut x = vec![0.0; self.grid.n()];
        for (flat, v) in self.values.chunks_exact(self.m).enumerate() {
            if self.mask[flat] {
                self.grid.node_into(flat, &mut x);
                f(&x, v, w);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area_converges() {
        let d = DomainSpec::unit_disk();
        let mut errs = vec![];
        for n in [32, 64, 128, 256] {
            let g = d.grid(n, 0.125).unwrap();
            let f = DomainField::zeros(d.clone(), g, 1).unwrap();
            errs.push((f.measure() - std::f64::consts::PI).abs());
        }
        assert!(errs[3] < errs[0]);
        assert!(errs[3] < 1e-2);
    }

    #[test]
    fn values_off_mask_rejected() {
        let d = DomainSpec::unit_disk();
        let g = d.grid(8, 0.25).unwrap();
        let mask = d.mask(&g);
        let vals = vec![1.0; g.len()];
        assert!(matches!(DomainField::new(g, 1, mask, vals, d), Err(Error::Support(_))));
    }

    #[test]
    fn half_ball_contains() {
        let d = DomainSpec::HalfBall { center: vec![0.0, 0.0], radius: 1.0, normal: vec![1.0, 0.0] };
        assert!(d.contains(&[-0.5, 0.1]));
        assert!(!d.contains(&[0.5, 0.1]));
        assert!(!d.contains(&[-1.5, 0.0]));
    }

    #[test]
    fn band_is_next_to_boundary() {
        let d = DomainSpec::Rect { lo: vec![-0.5, -0.5], hi: vec![0.5, 0.5] };
        let g = GridSpec::cube(2, 32, -1.0, 1.0).unwrap();
        let f = DomainField::zeros(d, g.clone(), 1).unwrap();
        let band = f.boundary_band(2.0);
        // 16x16 interior block, band = outer two rings
        assert_eq!(band.iter().filter(|&&b| b).count(), 16 * 16 - 12 * 12);
    }
}
