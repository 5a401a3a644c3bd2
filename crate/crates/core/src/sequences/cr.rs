//! The concentrating Cauchy-Riemann sequence `u_k = 1 / (k (z - z_k))` on a disk.
//!
//! With `z_k` at distance `d` outside the easternmost boundary point, the
//! unit-mass condition forces `ln d ~ -k^2 / pi`, far below what a double can
//! hold for moderate `k`. The field therefore stores `ln d`, and integrals are
//! computed in polar coordinates around the pole where the `1/r^2` weight of
//! `|u_k|^2` integrates in closed form along each ray.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{write_atomic, DomainField, DomainSpec, GridSpec, VectorFn};
use crate::integrand::HomogeneousIntegrand;
use crate::profiles::{gauss_legendre, radial_cutoff};

/// Bisection bracket for `ln d`.
const LN_D_RANGE: (f64, f64) = (-1e7, 5.0);
const PANEL_NODES: usize = 20;
/// Geometric panels toward the tangent rays.
const PANELS: usize = 52;

/// `eta (Re, Im)((z - z*)^{-power})` with `z* = dist * normal`, cut off by a
/// radial profile equal to one on `B(0, 1/4)` and zero outside `B(0, 0.45)`.
pub fn truncated_singular_field(x: &[f64], normal: &[f64], dist: f64, power: i32) -> [f64; 2] {
    let eta = radial_cutoff(x, &[0.0, 0.0], 0.25, 0.45);
    if eta == 0.0 {
        return [0.0, 0.0];
    }
    let w = Complex64::new(x[0] - dist * normal[0], x[1] - dist * normal[1]);
    let f = w.powi(-power);
    [eta * f.re, eta * f.im]
}

/// One member of the sequence on a disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrField {
    pub k: u32,
    pub center: [f64; 2],
    pub radius: f64,
    /// `ln` of the distance from the pole to the disk, in units of the radius.
    pub ln_dist: f64,
    /// Normalization tolerance the field was generated with.
    pub tol: f64,
}

/// Angular nodes and weights on `[0, psi_max]`, graded toward `psi_max`.
fn angular_rule(psi_max: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(PANEL_NODES);
    let mut edges = vec![0.0, 0.5 * psi_max];
    for j in 1..=PANELS {
        edges.push(psi_max * (1.0 - 0.5f64.powi(j as i32 + 1)));
    }
    let mut out = Vec::with_capacity(PANELS * PANEL_NODES);
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        for (xi, wi) in x.iter().zip(&w) {
            out.push((0.5 * (a + b) + 0.5 * (b - a) * xi, 0.5 * (b - a) * wi));
        }
    }
    out
}

/// Ray from the pole `(1 + d, 0)` in direction `(-cos psi, -sin psi)`:
/// entry and exit radii in the unit disk and `ln(r_out / r_in)`.
struct Ray {
    r_in: f64,
    r_out: f64,
    log_ratio: f64,
}

fn ray(psi: f64, d: f64, ln_d: f64) -> Option<Ray> {
    let c = psi.cos();
    let q = d * (2.0 + d);
    let disc = ((1.0 + d) * c).powi(2) - q;
    if !(disc > 0.0) || c <= 0.0 {
        return None;
    }
    let r_out = (1.0 + d) * c + disc.sqrt();
    let log_ratio = 2.0 * r_out.ln() - ln_d - (2.0 + d).ln();
    Some(Ray { r_in: q / r_out, r_out, log_ratio: log_ratio.max(0.0) })
}

fn psi_max(d: f64) -> f64 {
    (1.0 / (1.0 + d)).asin()
}

/// `k^2 ||u_k||^2` over the unit disk, as a function of `ln d`.
fn scaled_mass(ln_d: f64) -> f64 {
    let d = ln_d.exp();
    2.0 * angular_rule(psi_max(d))
        .iter()
        .map(|&(psi, w)| ray(psi, d, ln_d).map_or(0.0, |r| w * r.log_ratio))
        .sum::<f64>()
}

/// Places the pole so that `||u_k||_{L^2} = 1` within `tol`.
///
/// Only disks are supported. The mass is checked to decrease strictly along
/// a scan of the bracket before bisecting.
pub fn cr_singular_sequence(domain: &DomainSpec, k: u32, tol: f64) -> Result<CrField> {
    let DomainSpec::Ball { center, radius } = domain else {
        return Err(Error::InvalidArgument("the singular sequence is generated on disks".into()));
    };
    if center.len() != 2 {
        return Err(Error::DimensionMismatch("the singular sequence lives in the plane".into()));
    }
    if k == 0 || !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument("k must be >= 1 and tol in (0, 1)".into()));
    }
    let k2 = (k as f64).powi(2);
    let mass = |ld: f64| scaled_mass(ld) / k2;
    let (mut lo, mut hi) = LN_D_RANGE;
    let scan: Vec<f64> = (0..=40)
        .map(|i| {
            let t = i as f64 / 40.0;
            // dense near the upper end where the mass changes fastest in ln d
            hi - (hi - lo) * t.powi(4)
        })
        .map(mass)
        .collect();
    if scan.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Resolution("mass is not monotone in the pole distance".into()));
    }
    if !(mass(lo) > 1.0 && mass(hi) < 1.0) {
        return Err(Error::Resolution(format!("unit mass not bracketed for k = {k}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * mid.abs().max(1.0) {
            break;
        }
    }
    let field = CrField { k, center: [center[0], center[1]], radius: *radius, ln_dist: 0.5 * (lo + hi), tol };
    field.check_normalization()?;
    Ok(field)
}

impl CrField {
    pub fn domain(&self) -> DomainSpec {
        DomainSpec::Ball { center: self.center.to_vec(), radius: self.radius }
    }

    /// Distance from the pole to the disk (may underflow to zero).
    pub fn dist(&self) -> f64 {
        self.radius * self.ln_dist.exp()
    }

    /// The boundary point the pole approaches.
    pub fn boundary_point(&self) -> [f64; 2] {
        [self.center[0] + self.radius, self.center[1]]
    }

    pub fn pole(&self) -> [f64; 2] {
        [self.center[0] + self.radius * (1.0 + self.ln_dist.exp()), self.center[1]]
    }

    fn d(&self) -> f64 {
        self.ln_dist.exp()
    }

    /// `(Re, Im)` of `1 / (k (z - z_k))`.
    pub fn value_at(&self, x: &[f64]) -> [f64; 2] {
        let w = Complex64::new(
            (x[0] - self.center[0]) / self.radius - (1.0 + self.d()),
            (x[1] - self.center[1]) / self.radius,
        );
        let f = (w * (self.k as f64 * self.radius)).inv();
        [f.re, f.im]
    }

    /// `||u_k||^2_{L^2}` by polar quadrature.
    pub fn l2_norm_sq(&self) -> f64 {
        scaled_mass(self.ln_dist) / (self.k as f64).powi(2)
    }

    fn check_normalization(&self) -> Result<()> {
        let m = self.l2_norm_sq();
        if (m - 1.0).abs() > self.tol {
            return Err(Error::Precondition(format!("||u_k||^2 = {m} is not 1 within {}", self.tol)));
        }
        Ok(())
    }

    /// Visits the rays through the disk: `(psi, weight, ray)` over `[-psi_max, psi_max]`.
    fn for_each_ray(&self, mut f: impl FnMut(f64, f64, &Ray)) {
        let d = self.d();
        for (psi, w) in angular_rule(psi_max(d)) {
            for s in [psi, -psi] {
                if let Some(r) = ray(s, d, self.ln_dist) {
                    f(s, w, &r);
                }
            }
        }
    }

    /// Unit direction of `u_k` along the ray at angle `psi`.
    fn direction(psi: f64) -> [f64; 2] {
        [-psi.cos(), psi.sin()]
    }

    fn point(&self, psi: f64, r: f64) -> [f64; 2] {
        let d = self.d();
        [
            self.center[0] + self.radius * (1.0 + d - r * psi.cos()),
            self.center[1] - self.radius * r * psi.sin(),
        ]
    }

    /// `int v(x, u_k)` for a 2-homogeneous integrand. Along each ray the
    /// `1/r^2` weight is integrated in `ln r`; below `r = 1e-6` the integrand
    /// is taken at the innermost resolved point.
    pub fn integral(&self, v: &HomogeneousIntegrand) -> Result<f64> {
        if (v.p() - 2.0).abs() > 1e-12 || v.m() != 2 {
            return Err(Error::Precondition("polar integration needs a 2-homogeneous integrand on R^2".into()));
        }
        let k2 = (self.k as f64).powi(2);
        let mut total = 0.0;
        if !v.inner().depends_on_x() {
            let x = self.boundary_point();
            self.for_each_ray(|psi, w, r| total += w * r.log_ratio * v.eval(&x, &Self::direction(psi)));
            return Ok(total / k2);
        }
        let (gx, gw) = gauss_legendre(PANEL_NODES);
        let cut = 1e-6f64;
        self.for_each_ray(|psi, w, r| {
            let s = Self::direction(psi);
            let (lo, hi) = (r.r_out.ln() - r.log_ratio, r.r_out.ln());
            let split = cut.ln().clamp(lo, hi);
            let mut acc = (split - lo) * v.eval(&self.point(psi, split.exp()), &s);
            let panels = ((hi - split) / 0.5).ceil().max(1.0) as usize;
            let width = (hi - split) / panels as f64;
            for p in 0..panels {
                let a = split + p as f64 * width;
                for (xi, wi) in gx.iter().zip(&gw) {
                    let t = a + 0.5 * width * (1.0 + xi);
                    acc += 0.5 * width * wi * v.eval(&self.point(psi, t.exp()), &s);
                }
            }
            total += w * acc;
        });
        if !total.is_finite() {
            return Err(Error::NonFinite("polar integral".into()));
        }
        Ok(total / k2)
    }

    /// `int_Omega u_k . w` (the `1/r` singularity cancels against the polar Jacobian).
    pub fn pair(&self, w: &VectorFn) -> f64 {
        let (gx, gw) = gauss_legendre(24);
        let mut out = [0.0; 2];
        let mut total = 0.0;
        self.for_each_ray(|psi, wt, r| {
            let s = Self::direction(psi);
            let mut acc = 0.0;
            for (xi, wi) in gx.iter().zip(&gw) {
                let rr = r.r_in + 0.5 * (r.r_out - r.r_in) * (1.0 + xi);
                w(&self.point(psi, rr), &mut out);
                acc += 0.5 * (r.r_out - r.r_in) * wi * (s[0] * out[0] + s[1] * out[1]);
            }
            total += wt * acc;
        });
        total * self.radius / self.k as f64
    }

    /// `int |u_k|^2` over the part of the disk within `width` of its boundary.
    pub fn band_mass(&self, width: f64) -> f64 {
        let rho = 1.0 - width / self.radius;
        let d = self.d();
        let mut total = 0.0;
        self.for_each_ray(|psi, w, r| {
            let mut lr = r.log_ratio;
            if rho > 0.0 {
                let b = (1.0 + d) * psi.cos();
                let c = (1.0 + d).powi(2) - rho * rho;
                let disc = b * b - c;
                if disc > 0.0 {
                    let hi = b + disc.sqrt();
                    let lo = c / hi;
                    lr -= (hi / lo).ln();
                }
            }
            total += w * lr.max(0.0);
        });
        total / (self.k as f64).powi(2)
    }

    /// `int |u_k|^2` over `Omega ∩ B(x_b, s * radius)`.
    pub fn mass_near_boundary_point(&self, s: f64) -> f64 {
        let d = self.d();
        let mut total = 0.0;
        self.for_each_ray(|psi, w, r| {
            let ex = -psi.cos();
            let hi = -d * ex + (d * d * ex * ex - d * d + s * s).sqrt();
            let top = hi.min(r.r_out);
            if top > r.r_in {
                // ln(top / r_in) without forming r_in
                total += w * (r.log_ratio - (r.r_out / top).ln()).max(0.0);
            }
        });
        total / (self.k as f64).powi(2)
    }

    /// Node samples on `grid`, zero off the disk.
    pub fn sample(&self, grid: &GridSpec) -> Result<DomainField> {
        DomainField::from_fn(self.domain(), grid.clone(), 2, |x, o| o.copy_from_slice(&self.value_at(x)))
    }

    /// Standard grid for sampling: the disk's bounding box enlarged by an eighth.
    pub fn default_grid(&self, size: usize) -> Result<GridSpec> {
        self.domain().grid(size, 0.125)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    /// Loads a stored field and re-asserts its normalization.
    pub fn load_json(path: &Path) -> Result<Self> {
        let f: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if f.k == 0 || !(f.radius > 0.0) || !f.ln_dist.is_finite() {
            return Err(Error::Format("invalid singular-sequence record".into()));
        }
        f.check_normalization()?;
        Ok(f)
    }
}
