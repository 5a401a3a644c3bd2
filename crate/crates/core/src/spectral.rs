//! Multi-dimensional FFT on row-major grids, built from 1D transforms.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Signed frequency of DFT index `j` on an axis with `n` points.
pub fn freq_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// FFT plans for a fixed grid shape plus the angular wavenumbers per axis.
///
/// Wavenumbers are `2 pi xi / L` with the Nyquist mode set to zero, so the
/// spectral derivative of a real field is real and antisymmetric.
#[derive(Clone)]
pub struct Spectral {
    dims: Vec<usize>,
    len: usize,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
    wavenumbers: Vec<Vec<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("dims", &self.dims).finish()
    }
}

impl Spectral {
    pub fn new(dims: &[usize], extents: &[f64]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = dims.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inv = dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let wavenumbers = dims
            .iter()
            .zip(extents)
            .map(|(&n, &l)| {
                (0..n)
                    .map(|j| {
                        if 2 * j == n {
                            0.0
                        } else {
                            2.0 * std::f64::consts::PI * freq_index(j, n) as f64 / l
                        }
                    })
                    .collect()
            })
            .collect();
        Self { dims: dims.to_vec(), len: dims.iter().product(), fwd, inv, wavenumbers }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn len(&self) -> usize {
        self.len
    }
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
    /// Angular wavenumbers along `axis` (Nyquist zeroed).
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// Forward transform normalized by `1/len`, so coefficients are
    /// `c_xi = mean_j u_j exp(-2 pi i xi . j / N)`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.fwd);
        let s = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|c| *c *= s);
    }

    /// Synthesis `u_j = sum_xi c_xi exp(2 pi i xi . j / N)`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.inv);
    }

    fn run(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(buf.len(), self.len, "buffer does not match grid");
        let nd = self.dims.len();
        for axis in 0..nd {
            let n = self.dims[axis];
            let stride: usize = self.dims[axis + 1..].iter().product();
            let plan = &plans[axis];
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            if stride == 1 {
                for line in buf.chunks_exact_mut(n) {
                    plan.process_with_scratch(line, &mut scratch);
                }
                continue;
            }
            // gather LINES columns at a time so reads and writes stay contiguous
            const LINES: usize = 16;
            let block = n * stride;
            let mut lines = vec![Complex64::default(); n * LINES];
            for outer in buf.chunks_exact_mut(block) {
                for start in (0..stride).step_by(LINES) {
                    let w = LINES.min(stride - start);
                    for j in 0..n {
                        let row = &outer[j * stride + start..j * stride + start + w];
                        for (b, v) in row.iter().enumerate() {
                            lines[b * n + j] = *v;
                        }
                    }
                    plan.process_with_scratch(&mut lines[..w * n], &mut scratch);
                    for j in 0..n {
                        let row = &mut outer[j * stride + start..j * stride + start + w];
                        for (b, v) in row.iter_mut().enumerate() {
                            *v = lines[b * n + j];
                        }
                    }
                }
            }
        }
    }

    /// Calls `f(flat, k)` for every frequency, `k` being the angular wavevector.
    pub fn for_each_wavevector(&self, mut f: impl FnMut(usize, &[f64])) {
        let nd = self.dims.len();
        let mut idx = vec![0usize; nd];
        let mut k = vec![0.0; nd];
        for flat in 0..self.len {
            for a in 0..nd {
                k[a] = self.wavenumbers[a][idx[a]];
            }
            f(flat, &k);
            for a in (0..nd).rev() {
                idx[a] += 1;
                if idx[a] < self.dims[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Per-component forward transform of a real field stored node-major
    /// with `m` interleaved components.
    pub fn forward_components(&self, values: &[f64], m: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.len * m];
        let mut buf = vec![Complex64::default(); self.len];
        for c in 0..m {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(values[j * m + c], 0.0);
            }
            self.forward(&mut buf);
            for (j, b) in buf.iter().enumerate() {
                out[j * m + c] = *b;
            }
        }
        out
    }

    /// Inverse of [`Self::forward_components`], keeping the real part.
    pub fn inverse_components(&self, coeffs: &[Complex64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len * m];
        let mut buf = vec![Complex64::default(); self.len];
        for c in 0..m {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = coeffs[j * m + c];
            }
            self.inverse(&mut buf);
            for (j, b) in buf.iter().enumerate() {
                out[j * m + c] = b.re;
            }
        }
        out
    }

    /// Applies a per-frequency linear map from `m_in` to `m_out` components.
    pub fn apply_multiplier(
        &self,
        values: &[f64],
        m_in: usize,
        m_out: usize,
        mut f: impl FnMut(&[f64], &[Complex64], &mut [Complex64]),
    ) -> Vec<f64> {
        let coeffs = self.forward_components(values, m_in);
        let mut out = vec![Complex64::default(); self.len * m_out];
        self.for_each_wavevector(|flat, k| {
            f(k, &coeffs[flat * m_in..(flat + 1) * m_in], &mut out[flat * m_out..(flat + 1) * m_out]);
        });
        self.inverse_components(&out, m_out)
    }

    /// Spectral partial derivative along `axis` of a scalar grid function.
    pub fn derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let wn = &self.wavenumbers[axis];
        let stride: usize = self.dims[axis + 1..].iter().product();
        let n = self.dims[axis];
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        for (flat, c) in buf.iter_mut().enumerate() {
            let j = (flat / stride) % n;
            *c *= Complex64::new(0.0, wn[j]);
        }
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}
