use std::sync::OnceLock;

use num_complex::Complex64;

use super::{GridSpec, SampledField};
use crate::error::{Error, Result};
use crate::symbol::OperatorA;

/// A real `m`-component field on the periodic unit cube.
#[derive(Debug, Clone)]
pub struct PeriodicField {
    grid: GridSpec,
    m: usize,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl PartialEq for PeriodicField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.m == other.m && self.values == other.values
    }
}

impl PeriodicField {
    pub fn new(grid: GridSpec, m: usize, values: Vec<f64>) -> Result<Self> {
        if !grid.is_unit_cube() {
            return Err(Error::InvalidArgument("periodic fields live on the unit cube (-1/2, 1/2)^n".into()));
        }
        if m == 0 || values.len() != grid.len() * m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for m = {m}, got {}",
                grid.len() * m,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("periodic field values".into()));
        }
        Ok(Self { grid, m, values, coeffs: OnceLock::new() })
    }

    pub fn zeros(grid: GridSpec, m: usize) -> Result<Self> {
        let len = grid.len() * m;
        Self::new(grid, m, vec![0.0; len])
    }

    pub fn from_fn(grid: GridSpec, m: usize, f: impl Fn(&[f64], &mut [f64])) -> Result<Self> {
        let mut values = vec![0.0; grid.len() * m];
        let mut x = vec![0.0; grid.n()];
        for (flat, out) in values.chunks_exact_mut(m).enumerate() {
            grid.node_into(flat, &mut x);
            f(&x, out);
        }
        Self::new(grid, m, values)
    }

    /// Builds a real field from normalized Fourier coefficients.
    pub fn from_coefficients(grid: GridSpec, m: usize, coeffs: &[Complex64]) -> Result<Self> {
        let values = grid.spectral().inverse_components(coeffs, m);
        Self::new(grid, m, values)
    }

    /// Random trigonometric polynomial with frequencies `|xi|_inf <= max_freq`
    /// and Gaussian-decaying amplitudes.
    pub fn random_smooth<R: rand::Rng>(
        grid: GridSpec,
        m: usize,
        max_freq: usize,
        mean_zero: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let coeffs = Self::random_smooth_coefficients(&grid, m, max_freq, mean_zero, rng)?;
        Self::from_coefficients(grid, m, &coeffs)
    }

    /// Fourier coefficients of [`Self::random_smooth`], without the synthesis.
    pub fn random_smooth_coefficients<R: rand::Rng>(
        grid: &GridSpec,
        m: usize,
        max_freq: usize,
        mean_zero: bool,
        rng: &mut R,
    ) -> Result<Vec<Complex64>> {
        use rand_distr::StandardNormal;
        let n = grid.n();
        if grid.dims.iter().any(|&d| 2 * max_freq >= d) {
            return Err(Error::InvalidArgument("max_freq must stay below the Nyquist frequency".into()));
        }
        let mut coeffs = vec![Complex64::default(); grid.len() * m];
        let side = 2 * max_freq + 1;
        let total = side.pow(n as u32);
        let mut xi = vec![0i64; n];
        let mut idx = vec![0usize; n];
        let mut neg = vec![0usize; n];
        for t in 0..total {
            let mut r = t;
            for a in (0..n).rev() {
                xi[a] = (r % side) as i64 - max_freq as i64;
                r /= side;
            }
            // visit each conjugate pair once: first nonzero entry positive
            match xi.iter().find(|&&v| v != 0) {
                None => {
                    if !mean_zero {
                        for c in 0..m {
                            coeffs[c] = Complex64::new(rng.sample(StandardNormal), 0.0);
                        }
                    }
                    continue;
                }
                Some(&v) if v < 0 => continue,
                _ => {}
            }
            let r2 = xi.iter().map(|v| (v * v) as f64).sum::<f64>();
            let amp = (-r2 / (max_freq * max_freq) as f64).exp() * 0.5;
            for a in 0..n {
                let d = grid.dims[a] as i64;
                idx[a] = xi[a].rem_euclid(d) as usize;
                neg[a] = (-xi[a]).rem_euclid(d) as usize;
            }
            let (fp, fm) = (grid.flat_index(&idx), grid.flat_index(&neg));
            for c in 0..m {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let z = Complex64::new(re, im) * amp;
                coeffs[fp * m + c] = z;
                coeffs[fm * m + c] = z.conj();
            }
        }
        Ok(coeffs)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Normalized DFT coefficients, node-major with components inner.
    pub fn coefficients(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| self.grid.spectral().forward_components(&self.values, self.m))
    }

    /// Cell average.
    pub fn mean(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.m];
        for node in self.values.chunks_exact(self.m) {
            for (a, b) in s.iter_mut().zip(node) {
                *a += b;
            }
        }
        let len = self.grid.len() as f64;
        s.iter_mut().for_each(|v| *v /= len);
        s
    }

    pub fn map_values(&self, f: impl Fn(&[f64], &mut [f64])) -> Result<Self> {
        let mut out = self.values.clone();
        for (src, dst) in self.values.chunks_exact(self.m).zip(out.chunks_exact_mut(self.m)) {
            f(src, dst);
        }
        Self::new(self.grid.clone(), self.m, out)
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.grid != other.grid || self.m != other.m {
            return Err(Error::DimensionMismatch("fields live on different grids".into()));
        }
        let v = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Self::new(self.grid.clone(), self.m, v)
    }
}

impl SampledField for PeriodicField {
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
            self.grid.node_into(flat, &mut x);
            f(&x, v, w);
        }
    }
}

/// A `d`-component distribution on a periodic box given by its Fourier coefficients.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: GridSpec,
    pub d: usize,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    /// Grid values of the (real) trigonometric polynomial.
    pub fn to_values(&self) -> Vec<f64> {
        self.grid.spectral().inverse_components(&self.coeffs, self.d)
    }
}

/// `A u` with coefficients `2 pi i A(xi) u_hat(xi)` (Nyquist modes dropped).
pub fn apply_a_periodic(op: &OperatorA, u: &PeriodicField) -> Result<Spectrum> {
    if op.m() != u.m() || op.n() != u.grid().n() {
        return Err(Error::DimensionMismatch(format!(
            "operator ({}, n = {}) does not act on fields with m = {} in dimension {}",
            op.name(),
            op.n(),
            u.m(),
            u.grid().n()
        )));
    }
    Ok(apply_a_coeffs(op, u.grid(), u.coefficients()))
}

pub(crate) fn apply_a_coeffs(op: &OperatorA, grid: &GridSpec, coeffs: &[Complex64]) -> Spectrum {
    let (m, d) = (op.m(), op.d());
    let sp = grid.spectral();
    let mut out = vec![Complex64::default(); grid.len() * d];
    let a = op.coeffs();
    let mut sym = vec![0.0; d * m];
    sp.for_each_wavevector(|flat, k| {
        sym.fill(0.0);
        for (ai, ki) in a.iter().zip(k) {
            for r in 0..d {
                for c in 0..m {
                    sym[r * m + c] += ki * ai[(r, c)];
                }
            }
        }
        let u = &coeffs[flat * m..(flat + 1) * m];
        for r in 0..d {
            let mut acc = Complex64::default();
            for (uc, s) in u.iter().zip(&sym[r * m..(r + 1) * m]) {
                acc += uc * s;
            }
            out[flat * d + r] = Complex64::new(0.0, 1.0) * acc;
        }
    });
    Spectrum { grid: grid.clone(), d, coeffs: out }
}
