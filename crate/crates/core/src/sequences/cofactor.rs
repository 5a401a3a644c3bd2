//! `I(u) = int_B a(x) . Cof(D^2 u) nu(x)` along sequences of potentials on the unit ball in 3D.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SequenceMeta, SequenceReport, SequenceRow};
use crate::error::{Error, Result};
use crate::integrand::{CofactorNormal, Integrand, NormalField};
use crate::profiles::{gauss_legendre, poly_bump, poly_bump_grad, poly_bump_hessian};

/// How `u_k` departs from the base potential `u_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CofactorSequence {
    /// `u_k = u_0`.
    Constant,
    /// `u_k = u_0 + b / k` with a fixed bump `b`.
    Bump,
    /// `u_k = u_0 + k^{-2} chi(x) sin(k e . x)`: Hessians of fixed amplitude
    /// oscillating with frequency `k`.
    Oscillating { direction: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CofactorDemo {
    /// Rows `(c_i0, c_i1, c_i2, c_i3)` of the affine field `a`.
    pub a: Vec<Vec<f64>>,
    pub sequence: CofactorSequence,
    /// Gauss-Legendre nodes per radial and polar panel.
    pub nodes: usize,
}

impl Default for CofactorDemo {
    fn default() -> Self {
        Self {
            a: vec![vec![1.0, 0.5, 0.0, 0.0], vec![-0.3, 0.0, 1.0, 0.0], vec![0.7, 0.0, 0.0, 0.2]],
            sequence: CofactorSequence::Oscillating { direction: [1.0, 1.0, 1.0] },
            nodes: 24,
        }
    }
}

/// Hessian of `u_0 = x1^2 / 2 + x1 x2 x3 + x3^3 / 4`.
fn base_hessian(x: &[f64], out: &mut [f64; 9]) {
    *out = [1.0, x[2], x[1], x[2], 0.0, x[0], x[1], x[0], 1.5 * x[2]];
}

const BUMP_CENTER: [f64; 3] = [0.2, -0.1, 0.1];
const CUTOFF_RADIUS: f64 = 0.8;

fn sequence_hessian(seq: &CofactorSequence, k: f64, x: &[f64], out: &mut [f64; 9]) {
    base_hessian(x, out);
    let mut h = [0.0; 9];
    match seq {
        CofactorSequence::Constant => {}
        CofactorSequence::Bump => {
            poly_bump_hessian(x, &BUMP_CENTER, 0.5, 4, &mut h);
            for (o, v) in out.iter_mut().zip(&h) {
                *o += v / k;
            }
        }
        CofactorSequence::Oscillating { direction } => {
            let c0 = [0.0; 3];
            let chi = poly_bump(x, &c0, CUTOFF_RADIUS, 4);
            if chi == 0.0 {
                return;
            }
            let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            let e: Vec<f64> = direction.iter().map(|v| v / norm).collect();
            let mut g = [0.0; 3];
            poly_bump_grad(x, &c0, CUTOFF_RADIUS, 4, &mut g);
            poly_bump_hessian(x, &c0, CUTOFF_RADIUS, 4, &mut h);
            let (s, c) = (k * (e[0] * x[0] + e[1] * x[1] + e[2] * x[2])).sin_cos();
            for i in 0..3 {
                for j in 0..3 {
                    out[3 * i + j] += s * h[3 * i + j] / (k * k) + c * (g[i] * e[j] + e[i] * g[j]) / k - chi * s * e[i] * e[j];
                }
            }
        }
    }
}

/// Spherical product rule on the unit ball: radial panels split at the
/// cutoff radius, Gauss-Legendre in `cos theta`, trapezoid in `phi`.
fn ball_rule(nodes: usize, k: u32) -> Vec<([f64; 3], f64)> {
    let per = nodes + 2 * k as usize;
    let (gx, gw) = gauss_legendre(per);
    let mut radial = Vec::new();
    for (lo, hi) in [(0.0, CUTOFF_RADIUS), (CUTOFF_RADIUS, 1.0)] {
        for (x, w) in gx.iter().zip(&gw) {
            let r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
            radial.push((r, 0.5 * (hi - lo) * w * r * r));
        }
    }
    let nphi = 2 * per;
    let mut out = Vec::with_capacity(radial.len() * per * nphi);
    for &(r, wr) in &radial {
        for (ct, wt) in gx.iter().zip(&gw) {
            let st = (1.0 - ct * ct).sqrt();
            for p in 0..nphi {
                let phi = 2.0 * std::f64::consts::PI * p as f64 / nphi as f64;
                let w = wr * wt * 2.0 * std::f64::consts::PI / nphi as f64;
                out.push(([r * st * phi.cos(), r * st * phi.sin(), r * ct], w));
            }
        }
    }
    out
}

/// `(I(u_k), I(u_0), ||D^2 u_k||^2)` on the rule for `k`. Point values are
/// collected before summing so the result does not depend on the thread split.
fn functional(h: &CofactorNormal, seq: &CofactorSequence, k: u32, nodes: usize) -> (f64, f64, f64) {
    let parts: Vec<[f64; 3]> = ball_rule(nodes, k)
        .par_iter()
        .map(|(x, w)| {
            let mut f = [0.0; 9];
            let mut f0 = [0.0; 9];
            sequence_hessian(seq, k as f64, x, &mut f);
            base_hessian(x, &mut f0);
            [w * h.eval(x, &f), w * h.eval(x, &f0), w * f.iter().map(|t| t * t).sum::<f64>()]
        })
        .collect();
    parts.iter().fold((0.0, 0.0, 0.0), |a, p| (a.0 + p[0], a.1 + p[1], a.2 + p[2]))
}

/// `I(u_k)` and `|I(u_k) - I(u_0)|` for each `k`, both on the rule for `k`.
pub fn cofactor_demo(cfg: &CofactorDemo, ks: &[u32]) -> Result<SequenceReport> {
    if cfg.nodes < 4 || ks.contains(&0) {
        return Err(Error::InvalidArgument("need at least 4 nodes per panel and k >= 1".into()));
    }
    let h = CofactorNormal::new(cfg.a.clone(), NormalField::Radial)?;
    let mut rows = Vec::new();
    let mut limit = f64::NAN;
    for &k in ks {
        let (v, v0, n2) = functional(&h, &cfg.sequence, k, cfg.nodes);
        limit = v0;
        rows.push(SequenceRow {
            k,
            lp_norm: n2.sqrt(),
            integrals: vec![v, (v - v0).abs()],
            pairings: Vec::new(),
            negative_norm: None,
            boundary_fraction: None,
        });
    }
    Ok(SequenceReport {
        meta: SequenceMeta {
            generator: "cofactor".into(),
            domain: Some(crate::fields::DomainSpec::Ball { center: vec![0.0; 3], radius: 1.0 }),
            operator: None,
            p: 2.0,
            integrands: vec!["cofactor_normal".into(), "gap_to_limit".into()],
            grid: None,
            params: serde_json::json!({ "demo": cfg, "limit": limit }),
        },
        rows,
    })
}
