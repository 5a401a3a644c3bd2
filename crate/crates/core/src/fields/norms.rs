use num_complex::Complex64;

use super::{DomainField, GridSpec, SampledField, Spectrum, VectorFn};
use crate::error::{Error, Result};
use crate::spectral::Spectral;
use crate::symbol::OperatorA;

/// Relative residual target for the masked solves.
pub const CG_TOL: f64 = 1e-10;
/// Iteration cap for the masked solves.
pub const CG_MAX_ITER: usize = 5000;

/// Midpoint-rule `L^p` norm.
pub fn lp_norm(field: &dyn SampledField, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent {p} must be finite and >= 1")));
    }
    let mut s = 0.0;
    let mut bad = false;
    field.for_each_sample(&mut |_, v, w| {
        let a = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !a.is_finite() {
            bad = true;
        }
        s += a.powf(p) * w;
    });
    if bad || !s.is_finite() {
        return Err(Error::NonFinite("lp_norm".into()));
    }
    Ok(s.powf(1.0 / p))
}

/// `int u . w dx` by the field's own quadrature.
pub fn pair_weak(u: &dyn SampledField, w: &VectorFn) -> Result<f64> {
    let mut buf = vec![0.0; u.components()];
    let mut s = 0.0;
    u.for_each_sample(&mut |x, v, wt| {
        w(x, &mut buf);
        s += wt * v.iter().zip(&buf).map(|(a, b)| a * b).sum::<f64>();
    });
    if !s.is_finite() {
        return Err(Error::NonFinite("pair_weak".into()));
    }
    Ok(s)
}

/// Dual norm of the full `H^1` norm on the periodic box:
/// `(|box| sum |g_hat|^2 / (1 + |k|^2))^{1/2}`.
pub fn hminus1_norm_periodic(g: &Spectrum) -> f64 {
    let sp = g.grid.spectral();
    let d = g.d;
    let mut s = 0.0;
    sp.for_each_wavevector(|flat, k| {
        let w = 1.0 + k.iter().map(|v| v * v).sum::<f64>();
        s += g.coeffs[flat * d..(flat + 1) * d].iter().map(|c| c.norm_sqr()).sum::<f64>() / w;
    });
    (g.grid.volume() * s).sqrt()
}

/// Preconditioned conjugate gradients for SPD systems; `x` holds the
/// initial guess and receives the solution. Returns the iteration count.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(0);
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / bnorm;
    for it in 0..max_iter {
        if res <= tol {
            return Ok(it);
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverDivergence { iterations: it, residual: res });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt() / bnorm;
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= tol {
        Ok(max_iter)
    } else {
        Err(Error::SolverDivergence { iterations: max_iter, residual: res })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative norm of `A u` over a masked domain.
///
/// Test functions are grid functions vanishing off the mask, with the
/// discrete `H^1` product `h^n psi.(I - Delta) psi` built from spectral
/// derivatives on the bounding box. The norm of a functional `g` is
/// `(h^n g.K_D^{-1} g)^{1/2}` with `K_D` the masked restriction of `I - Delta`.
#[derive(Debug, Clone)]
pub struct DomainNorm {
    op: OperatorA,
    grid: GridSpec,
    spectral: Spectral,
    mask_idx: Vec<usize>,
    symbol_weight: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl DomainNorm {
    pub fn new(op: &OperatorA, grid: &GridSpec, mask: &[bool]) -> Result<Self> {
        if op.n() != grid.n() {
            return Err(Error::DimensionMismatch("operator and grid dimensions differ".into()));
        }
        if mask.len() != grid.len() {
            return Err(Error::DimensionMismatch("mask does not match grid".into()));
        }
        let mask_idx: Vec<usize> = (0..grid.len()).filter(|&i| mask[i]).collect();
        if mask_idx.is_empty() {
            return Err(Error::InvalidArgument("empty mask".into()));
        }
        let spectral = grid.spectral();
        let mut symbol_weight = vec![0.0; grid.len()];
        spectral.for_each_wavevector(|flat, k| {
            symbol_weight[flat] = 1.0 + k.iter().map(|v| v * v).sum::<f64>();
        });
        Ok(Self {
            op: op.clone(),
            grid: grid.clone(),
            spectral,
            mask_idx,
            symbol_weight,
            tol: CG_TOL,
            max_iter: CG_MAX_ITER,
        })
    }

    pub fn op(&self) -> &OperatorA {
        &self.op
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn mask_indices(&self) -> &[usize] {
        &self.mask_idx
    }

    /// Spectral `A u` on the whole box (`m` components in, `d` out).
    pub fn apply_op(&self, u: &[f64]) -> Vec<f64> {
        let op = &self.op;
        let (m, d) = (op.m(), op.d());
        self.spectral.apply_multiplier(u, m, d, |k, inp, out| {
            let sym = op.symbol_linear(k);
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for (c, v) in inp.iter().enumerate() {
                    acc += v * sym[(r, c)];
                }
                *o = Complex64::new(0.0, 1.0) * acc;
            }
        })
    }

    /// Transpose of [`Self::apply_op`] with respect to the node sum.
    pub fn apply_op_adjoint(&self, psi: &[f64]) -> Vec<f64> {
        let op = &self.op;
        let (m, d) = (op.m(), op.d());
        self.spectral.apply_multiplier(psi, d, m, |k, inp, out| {
            let sym = op.symbol_linear(k);
            for (c, o) in out.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for (r, v) in inp.iter().enumerate() {
                    acc += v * sym[(r, c)];
                }
                *o = Complex64::new(0.0, -1.0) * acc;
            }
        })
    }

    fn multiplier(&self, x: &[f64], out: &mut [f64], d: usize, invert: bool) {
        let mut full = vec![0.0; self.grid.len() * d];
        for (j, &i) in self.mask_idx.iter().enumerate() {
            full[i * d..(i + 1) * d].copy_from_slice(&x[j * d..(j + 1) * d]);
        }
        let mut c = self.spectral.forward_components(&full, d);
        for (flat, w) in self.symbol_weight.iter().enumerate() {
            let s = if invert { 1.0 / w } else { *w };
            for v in &mut c[flat * d..(flat + 1) * d] {
                *v *= s;
            }
        }
        let back = self.spectral.inverse_components(&c, d);
        for (j, &i) in self.mask_idx.iter().enumerate() {
            out[j * d..(j + 1) * d].copy_from_slice(&back[i * d..(i + 1) * d]);
        }
    }

    /// Squared dual norm of a `d`-component grid functional (only mask
    /// entries are read). Returns the norm squared, the masked solution
    /// `psi`, and the CG iteration count. `warm` seeds the solver.
    pub fn dual_norm_sq(&self, g: &[f64], d: usize, warm: Option<&[f64]>) -> Result<(f64, Vec<f64>, usize)> {
        if g.len() != self.grid.len() * d {
            return Err(Error::DimensionMismatch("functional does not match grid".into()));
        }
        let b: Vec<f64> = self.mask_idx.iter().flat_map(|&i| g[i * d..(i + 1) * d].iter().copied()).collect();
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("negative-norm right-hand side".into()));
        }
        let mut x = match warm {
            Some(w) if w.len() == b.len() => w.to_vec(),
            _ => vec![0.0; b.len()],
        };
        let iters = pcg(
            |v, o| self.multiplier(v, o, d, false),
            |v, o| self.multiplier(v, o, d, true),
            &b,
            &mut x,
            self.tol,
            self.max_iter,
        )?;
        let val = self.grid.cell_volume() * dot(&b, &x);
        Ok((val.max(0.0), x, iters))
    }

    /// `||A u||^2` in the masked negative norm, with its gradient with respect
    /// to the node values of `u` (full grid, `m` components).
    pub fn norm_sq_with_grad(&self, u: &[f64], warm: Option<&[f64]>) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let d = self.op.d();
        let g = self.apply_op(u);
        let (val, psi, _) = self.dual_norm_sq(&g, d, warm)?;
        let mut psi_full = vec![0.0; self.grid.len() * d];
        for (j, &i) in self.mask_idx.iter().enumerate() {
            psi_full[i * d..(i + 1) * d].copy_from_slice(&psi[j * d..(j + 1) * d]);
        }
        let hn = self.grid.cell_volume();
        let grad = self.apply_op_adjoint(&psi_full).into_iter().map(|v| 2.0 * hn * v).collect();
        Ok((val, grad, psi))
    }

    pub fn norm_of(&self, u: &[f64]) -> Result<f64> {
        let g = self.apply_op(u);
        Ok(self.dual_norm_sq(&g, self.op.d(), None)?.0.sqrt())
    }
}

/// `||A u||` in the dual of `H^1_0` over the field's mask.
pub fn hminus1_norm_domain(op: &OperatorA, u: &DomainField) -> Result<f64> {
    if op.m() != u.m() {
        return Err(Error::DimensionMismatch("operator and field components differ".into()));
    }
    DomainNorm::new(op, u.grid(), u.mask())?.norm_of(u.values())
}

/// Dual norm over a mask of a `d`-component functional given by grid values.
pub fn hminus1_dual_norm_masked(g: &[f64], d: usize, grid: &GridSpec, mask: &[bool]) -> Result<f64> {
    // the operator is only used for its dimension here
    let dummy = OperatorA::new("id", vec![nalgebra::DMatrix::zeros(d, 1); grid.n()])?;
    Ok(DomainNorm::new(&dummy, grid, mask)?.dual_norm_sq(g, d, None)?.0.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{apply_a_periodic, DomainSpec, PeriodicField};
    use crate::symbol::catalog;
    use std::f64::consts::PI;

    fn unit(n: usize) -> GridSpec {
        GridSpec::unit_cube(2, n).unwrap()
    }

    #[test]
    fn lp_norm_examples() {
        let one = PeriodicField::from_fn(unit(16), 2, |_, o| o.copy_from_slice(&[0.6, 0.8])).unwrap();
        for p in [1.5, 2.0, 5.0] {
            assert!((lp_norm(&one, p).unwrap() - 1.0).abs() < 1e-13);
        }
        let half = PeriodicField::from_fn(unit(16), 2, |x, o| {
            o[0] = if x[0] < 0.0 { 1.0 } else { 0.0 };
            o[1] = 0.0;
        })
        .unwrap();
        assert!((lp_norm(&half, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-13);
        let s = PeriodicField::from_fn(unit(16), 2, |x, o| {
            o[0] = (2.0 * PI * x[0]).sin();
            o[1] = 0.0;
        })
        .unwrap();
        assert!((lp_norm(&s, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn periodic_hminus1_of_cosine() {
        let op = catalog("div", Some(2)).unwrap();
        // u = (sin(2 pi x1) / (2 pi), 0) has div u = cos(2 pi x1)
        let u = PeriodicField::from_fn(unit(16), 2, |x, o| {
            o[0] = (2.0 * PI * x[0]).sin() / (2.0 * PI);
            o[1] = 0.0;
        })
        .unwrap();
        let g = apply_a_periodic(&op, &u).unwrap();
        let expect = 0.5f64.sqrt() / (1.0 + 4.0 * PI * PI).sqrt();
        assert!((hminus1_norm_periodic(&g) - expect).abs() < 1e-13);
    }

    #[test]
    fn full_mask_matches_periodic() {
        let op = catalog("cauchy_riemann", None).unwrap();
        let g = unit(16);
        let u = PeriodicField::from_fn(g.clone(), 2, |x, o| {
            o[0] = (-30.0 * (x[0] * x[0] + x[1] * x[1])).exp();
            o[1] = x[0] * (-20.0 * (x[0] * x[0] + 2.0 * x[1] * x[1])).exp();
        })
        .unwrap();
        let per = hminus1_norm_periodic(&apply_a_periodic(&op, &u).unwrap());
        let dn = DomainNorm::new(&op, &g, &vec![true; g.len()]).unwrap();
        let dom = dn.norm_of(u.values()).unwrap();
        assert!((per - dom).abs() < 1e-9 * per);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let op = catalog("cauchy_riemann", None).unwrap();
        let dom = DomainSpec::unit_disk();
        let grid = dom.grid(16, 0.125).unwrap();
        let mask = dom.mask(&grid);
        let dn = DomainNorm::new(&op, &grid, &mask).unwrap();
        let mut u = vec![0.0; grid.len() * 2];
        for (i, v) in u.iter_mut().enumerate() {
            if mask[i / 2] {
                *v = ((i * 7919) % 13) as f64 / 13.0 - 0.5;
            }
        }
        let (c0, grad, _) = dn.norm_sq_with_grad(&u, None).unwrap();
        let i = (0..u.len()).find(|&i| mask[i / 2] && i > u.len() / 2).unwrap();
        let eps = 1e-6;
        let mut up = u.clone();
        up[i] += eps;
        let mut dn2 = dn.clone();
        dn2.tol = 1e-13;
        let cp = dn2.norm_sq_with_grad(&up, None).unwrap().0;
        let mut um = u.clone();
        um[i] -= eps;
        let cm = dn2.norm_sq_with_grad(&um, None).unwrap().0;
        let fd = (cp - cm) / (2.0 * eps);
        assert!(c0 > 0.0);
        assert!((fd - grad[i]).abs() < 1e-5 * grad[i].abs().max(1e-3), "{fd} vs {}", grad[i]);
    }
}
