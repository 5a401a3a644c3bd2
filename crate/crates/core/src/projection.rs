//! The periodic projection onto `A`-free fields as a Fourier multiplier.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{apply_a_periodic, hminus1_norm_periodic, lp_norm, GridSpec, PeriodicField};
use crate::symbol::{kernel_projector, ConstantRankOperator};

/// Per-frequency kernel projectors for one operator on one grid.
///
/// Frequencies with zero (Nyquist-reduced) wavevector, in particular the
/// mean, are mapped to zero.
#[derive(Debug, Clone)]
pub struct AfreeProjector {
    op: ConstantRankOperator,
    grid: GridSpec,
    /// Row-major `m x m` blocks, one per frequency.
    matrices: Vec<f64>,
    active: Vec<bool>,
}

impl AfreeProjector {
    pub fn new(op: &ConstantRankOperator, grid: &GridSpec) -> Result<Self> {
        if op.op().n() != grid.n() {
            return Err(Error::DimensionMismatch("operator and grid dimensions differ".into()));
        }
        let sp = grid.spectral();
        let m = op.op().m();
        let mut matrices = vec![0.0; grid.len() * m * m];
        let mut active = vec![false; grid.len()];
        let mut err = None;
        sp.for_each_wavevector(|flat, k| {
            if err.is_some() || k.iter().all(|&v| v == 0.0) {
                return;
            }
            match kernel_projector(op, k) {
                Ok(p) => {
                    let block = &mut matrices[flat * m * m..(flat + 1) * m * m];
                    for r in 0..m {
                        for c in 0..m {
                            block[r * m + c] = p[(r, c)];
                        }
                    }
                    active[flat] = true;
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(Self { op: op.clone(), grid: grid.clone(), matrices, active })
    }

    pub fn op(&self) -> &ConstantRankOperator {
        &self.op
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Projects raw node values (`m` components per node).
    pub fn project_values(&self, values: &[f64]) -> Vec<f64> {
        let m = self.op.op().m();
        let sp = self.grid.spectral();
        let mut c = sp.forward_components(values, m);
        self.project_coeffs(&mut c);
        sp.inverse_components(&c, m)
    }

    pub fn project_coeffs(&self, c: &mut [Complex64]) {
        let m = self.op.op().m();
        let mut tmp = vec![Complex64::default(); m];
        for ((u, p), &on) in c.chunks_exact_mut(m).zip(self.matrices.chunks_exact(m * m)).zip(&self.active) {
            if !on {
                u.fill(Complex64::default());
                continue;
            }
            for (t, row) in tmp.iter_mut().zip(p.chunks_exact(m)) {
                *t = u.iter().zip(row).map(|(a, b)| a * b).sum();
            }
            u.copy_from_slice(&tmp);
        }
    }

    pub fn project(&self, u: &PeriodicField) -> Result<PeriodicField> {
        if u.grid() != &self.grid || u.m() != self.op.op().m() {
            return Err(Error::DimensionMismatch("field does not match projector".into()));
        }
        let mut c = u.coefficients().to_vec();
        self.project_coeffs(&mut c);
        PeriodicField::from_coefficients(self.grid.clone(), u.m(), &c)
    }
}

/// `T u`: coefficients `P(xi/|xi|) u_hat(xi)` for `xi != 0`, zero mean.
pub fn project_afree(op: &ConstantRankOperator, u: &PeriodicField) -> Result<PeriodicField> {
    AfreeProjector::new(op, u.grid())?.project(u)
}

/// Diagnostics of the projection on one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    /// Negative norm of `A(T u)`.
    pub residual_afree: f64,
    /// `||T T u - T u||` in `L^2`.
    pub idempotence_gap: f64,
    pub mean_of_tu: Vec<f64>,
    /// `||u - a_u - T u|| / ||A u||`; `None` when the denominator is below `1e-14`.
    pub poincare_ratio: Option<f64>,
    pub norm_u: f64,
    pub norm_tu: f64,
    pub norm_au: f64,
}

pub fn projection_report(op: &ConstantRankOperator, u: &PeriodicField) -> Result<ProjectionReport> {
    let proj = AfreeProjector::new(op, u.grid())?;
    report_with(&proj, u)
}

pub fn report_with(proj: &AfreeProjector, u: &PeriodicField) -> Result<ProjectionReport> {
    let op = proj.op().op();
    let tu = proj.project(u)?;
    let ttu = proj.project(&tu)?;
    let residual_afree = hminus1_norm_periodic(&apply_a_periodic(op, &tu)?);
    let idempotence_gap = lp_norm(&ttu.lin_comb(1.0, &tu, -1.0)?, 2.0)?;
    let mean = u.mean();
    let rest = PeriodicField::new(
        u.grid().clone(),
        u.m(),
        u.values()
            .chunks_exact(u.m())
            .zip(tu.values().chunks_exact(u.m()))
            .flat_map(|(a, b)| a.iter().zip(b).zip(&mean).map(|((x, y), c)| x - c - y).collect::<Vec<_>>())
            .collect(),
    )?;
    let norm_au = hminus1_norm_periodic(&apply_a_periodic(op, u)?);
    let poincare_ratio = if norm_au < 1e-14 { None } else { Some(lp_norm(&rest, 2.0)? / norm_au) };
    Ok(ProjectionReport {
        residual_afree,
        idempotence_gap,
        mean_of_tu: tu.mean(),
        poincare_ratio,
        norm_u: lp_norm(u, 2.0)?,
        norm_tu: lp_norm(&tu, 2.0)?,
        norm_au,
    })
}

/// The Poincare ratio of [`ProjectionReport`] computed from Fourier
/// coefficients alone, by Parseval, in one pass without transforms.
pub fn poincare_ratio_coeffs(proj: &AfreeProjector, coeffs: &[Complex64]) -> Result<Option<f64>> {
    let op = proj.op.op();
    let (m, d) = (op.m(), op.d());
    if coeffs.len() != proj.grid.len() * m {
        return Err(Error::DimensionMismatch("coefficients do not match projector".into()));
    }
    // coefficient matrices flattened row-major
    let a: Vec<Vec<f64>> = op.coeffs().iter().map(|ai| (0..d * m).map(|j| ai[(j / m, j % m)]).collect()).collect();
    let mut sym = vec![0.0; d * m];
    let (mut rest, mut dual) = (0.0, 0.0);
    proj.grid.spectral().for_each_wavevector(|flat, k| {
        let u = &coeffs[flat * m..(flat + 1) * m];
        // zero modes contribute to neither sum; band-limited fields are mostly zeros
        if u.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            return;
        }
        // the mean is removed before comparing with T u
        if flat > 0 {
            rest += if proj.active[flat] {
                let p = &proj.matrices[flat * m * m..(flat + 1) * m * m];
                p.chunks_exact(m)
                    .zip(u)
                    .map(|(row, ur)| (ur - row.iter().zip(u).map(|(b, a)| a * b).sum::<Complex64>()).norm_sqr())
                    .sum::<f64>()
            } else {
                u.iter().map(|c| c.norm_sqr()).sum::<f64>()
            };
        }
        sym.fill(0.0);
        for (ai, ki) in a.iter().zip(k) {
            sym.iter_mut().zip(ai).for_each(|(s, v)| *s += ki * v);
        }
        let au: f64 = sym.chunks_exact(m).map(|row| row.iter().zip(u).map(|(s, c)| c * s).sum::<Complex64>().norm_sqr()).sum();
        dual += au / (1.0 + k.iter().map(|v| v * v).sum::<f64>());
    });
    let vol = proj.grid.volume();
    let norm_au = (vol * dual).sqrt();
    Ok(if norm_au < 1e-14 { None } else { Some((vol * rest).sqrt() / norm_au) })
}
