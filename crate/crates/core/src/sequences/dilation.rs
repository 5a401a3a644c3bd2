//! Concentrating dilations `u_k(x) = k^{n/p} u(k (x - x0))`.

use super::boundary_distance;
use crate::error::{Error, Result};
use crate::fields::{DomainField, DomainSpec, QuadField};

/// Pushes the base grid forward under `y -> x0 + y / k` and keeps the images
/// inside `target`. Each base node becomes a quadrature point of weight
/// `h^n / k^n`, so norms and `p`-homogeneous integrals are preserved up to the
/// part of the support that leaves the domain.
pub fn dilation_sequence(base: &DomainField, x0: &[f64], k: u32, p: f64, target: &DomainSpec) -> Result<QuadField> {
    let grid = base.grid();
    let n = grid.n();
    let m = base.m();
    if x0.len() != n || target.dim().is_some_and(|d| d != n) {
        return Err(Error::DimensionMismatch("x0, base field and target must share the dimension".into()));
    }
    if k == 0 || !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument("k must be >= 1 and p in (1, inf)".into()));
    }
    let kf = k as f64;
    let mut y = vec![0.0; n];
    for (flat, v) in base.values().chunks_exact(m).enumerate() {
        if v.iter().any(|&t| t != 0.0) {
            grid.node_into(flat, &mut y);
            if y.iter().map(|t| t * t).sum::<f64>() >= 1.0 {
                return Err(Error::Support("base field is not supported in the unit ball".into()));
            }
        }
    }
    // boundary points keep only the part of the support inside the domain;
    // from an interior point the support must stay in the bounding box
    if let Some((lo, hi)) = target.bounds() {
        let r = 1.0 / kf;
        let on_boundary = boundary_distance(target, x0).is_some_and(|d| d.abs() < 1e-12);
        let outside = x0.iter().zip(lo.iter().zip(&hi)).any(|(c, (a, b))| c < a || c > b);
        let escapes = x0.iter().zip(lo.iter().zip(&hi)).any(|(c, (a, b))| c - r < *a - 1e-12 || c + r > *b + 1e-12);
        if outside || (escapes && !on_boundary) {
            return Err(Error::Support(format!("support of u_{k} leaves the bounding box")));
        }
    }
    let scale = kf.powf(n as f64 / p);
    let w = grid.cell_volume() / kf.powi(n as i32);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut values = Vec::new();
    let mut x = vec![0.0; n];
    for (flat, v) in base.values().chunks_exact(m).enumerate() {
        if !base.mask()[flat] || v.iter().all(|&t| t == 0.0) {
            continue;
        }
        grid.node_into(flat, &mut y);
        for a in 0..n {
            x[a] = x0[a] + y[a] / kf;
        }
        if !target.contains(&x) {
            continue;
        }
        points.extend_from_slice(&x);
        weights.push(w);
        values.extend(v.iter().map(|t| scale * t));
    }
    QuadField::new(n, m, points, weights, values)
}
