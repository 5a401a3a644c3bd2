//! Generators for oscillating and concentrating sequences, and diagnostics along them.

mod cofactor;
mod cr;
mod dilation;
mod hessian;

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cofactor::{cofactor_demo, CofactorDemo, CofactorSequence};
pub use cr::{cr_singular_sequence, truncated_singular_field, CrField};
pub use dilation::dilation_sequence;
pub use hessian::{bump_search, hessian_demo, hessian_half_integral, HessianBump, HessianReport, TrigMode};

use crate::error::{Error, Result};
use crate::fields::{
    hminus1_dual_norm_masked, hminus1_norm_domain, lp_norm, pair_weak, write_atomic, DomainField, DomainSpec, GridSpec, SampledField,
};
use crate::integrand::{functional_eval, HomogeneousIntegrand, NormPower};
use crate::profiles::{poly_bump, radial_cutoff, radial_cutoff_grad};
use crate::symbol::OperatorA;

/// One `k` along a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub k: u32,
    pub lp_norm: f64,
    /// Values named by [`SequenceMeta::integrands`].
    pub integrals: Vec<f64>,
    /// Pairings with the test-field battery.
    pub pairings: Vec<f64>,
    pub negative_norm: Option<f64>,
    pub boundary_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub generator: String,
    pub domain: Option<DomainSpec>,
    pub operator: Option<String>,
    pub p: f64,
    pub integrands: Vec<String>,
    pub grid: Option<usize>,
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub meta: SequenceMeta,
    pub rows: Vec<SequenceRow>,
}

impl SequenceReport {
    /// Smallest value of integral column `i` over the computed range.
    pub fn min_integral(&self, i: usize) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.integrals.get(i).copied()).reduce(f64::min)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["k".to_string(), "lp_norm".to_string()];
        h.extend(self.meta.integrands.iter().map(|n| format!("I_{n}")));
        let pairs = self.rows.first().map_or(0, |r| r.pairings.len());
        h.extend((0..pairs).map(|j| format!("pair_{j}")));
        h.push("negative_norm".into());
        h.push("boundary_fraction".into());
        h
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.csv_header()).map_err(|e| Error::Format(e.to_string()))?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for r in &self.rows {
            let mut rec = vec![r.k.to_string(), r.lp_norm.to_string()];
            rec.extend(r.integrals.iter().map(|v| v.to_string()));
            rec.extend(r.pairings.iter().map(|v| v.to_string()));
            rec.push(opt(r.negative_norm));
            rec.push(opt(r.boundary_fraction));
            w.write_record(&rec).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Format(e.to_string()))
    }

    /// Writes the CSV table and a JSON sidecar (`<path>.json`) with the metadata.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_csv()?)?;
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        let meta = serde_json::json!({
            "meta": self.meta,
            "rows": self.rows.len(),
            "min_integrals": (0..self.meta.integrands.len()).map(|i| self.min_integral(i)).collect::<Vec<_>>(),
        });
        write_atomic(Path::new(&side), serde_json::to_string_pretty(&meta)?.as_bytes())
    }
}

/// Gaussian test field `exp(-|x - c|^2 / (2 sigma^2)) e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestField {
    pub center: Vec<f64>,
    pub sigma: f64,
    pub direction: Vec<f64>,
}

impl TestField {
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        let g = (-r2 / (2.0 * self.sigma * self.sigma)).exp();
        for (o, d) in out.iter_mut().zip(&self.direction) {
            *o = g * d;
        }
    }
}

/// Ten fixed Gaussians in the unit ball of `R^n` with `m` components,
/// centers at least `3/4` away from `avoid`.
pub fn gaussian_battery(n: usize, m: usize, avoid: &[f64]) -> Vec<TestField> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x00ba_77e4);
    let mut out = Vec::with_capacity(10);
    while out.len() < 10 {
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.7..0.7)).collect();
        let far = c.iter().zip(avoid).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() >= 0.5625;
        if c.iter().map(|v| v * v).sum::<f64>() >= 0.49 || !far {
            continue;
        }
        let dir = crate::symbol::sample_unit_sphere(&mut rng, m);
        out.push(TestField { center: c, sigma: 0.4 + 0.02 * out.len() as f64, direction: dir });
    }
    out
}

/// Pairings decaying monotonically up to `slack`, and by at least `factor`
/// from the first to the last row, per test field.
pub fn weakly_null(pairings: &[Vec<f64>], slack: f64, factor: f64) -> Vec<bool> {
    let count = pairings.first().map_or(0, |p| p.len());
    (0..count)
        .map(|j| {
            let col: Vec<f64> = pairings.iter().map(|p| p[j].abs()).collect();
            let mono = col.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0]);
            mono && col.last().copied().unwrap_or(0.0) * factor <= col[0]
        })
        .collect()
}

/// Smooth cutoff equal to one on `B(center, r_in)` and zero outside `B(center, r_out)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoff {
    pub center: Vec<f64>,
    pub r_in: f64,
    pub r_out: f64,
}

impl Cutoff {
    pub fn eval(&self, x: &[f64]) -> f64 {
        radial_cutoff(x, &self.center, self.r_in, self.r_out)
    }
    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        radial_cutoff_grad(x, &self.center, self.r_in, self.r_out, out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub k: u32,
    pub l2_norm: f64,
    pub negative_norm: f64,
    /// Largest battery pairing of `u_k`.
    pub max_pairing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub rows: Vec<TruncationRow>,
    /// Least-squares slope of `ln ||A(eta u_k)||` against `ln k`.
    pub rate: f64,
    pub decreasing: bool,
    /// The sequence failed the weak-nullity probe, so the hypotheses do not hold.
    pub precondition_violated: bool,
}

/// Negative norms of `A(eta u_k)` over each field's own mask.
pub fn truncation_decay(
    op: &OperatorA,
    seq: &(dyn Fn(u32) -> Result<DomainField> + Sync),
    eta: &Cutoff,
    ks: &[u32],
) -> Result<TruncationReport> {
    if ks.len() < 2 {
        return Err(Error::InvalidArgument("need at least two values of k".into()));
    }
    let mut rows = Vec::new();
    for &k in ks {
        let u = seq(k)?;
        let battery = gaussian_battery(u.grid().n(), u.m(), &eta.center);
        let p: Vec<f64> = battery.iter().map(|t| pair_weak(&u, &|x: &[f64], o: &mut [f64]| t.eval(x, o))).collect::<Result<_>>()?;
        let cut = u.scaled_by(|x| eta.eval(x))?;
        rows.push(TruncationRow {
            k,
            l2_norm: lp_norm(&u, 2.0)?,
            negative_norm: hminus1_norm_domain(op, &cut)?,
            max_pairing: p.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        });
    }
    Ok(finish_truncation(rows))
}

/// Truncation decay for sequences that are `A`-free in the domain: there
/// `A(eta u_k) = sum_i A^(i) u_k d_i eta`, and that commutator is evaluated
/// pointwise, so only the region where `eta` varies needs to be resolved.
pub fn commutator_decay(
    op: &OperatorA,
    seq: &(dyn Fn(u32) -> Result<DomainField> + Sync),
    eta: &Cutoff,
    ks: &[u32],
) -> Result<TruncationReport> {
    if ks.len() < 2 {
        return Err(Error::InvalidArgument("need at least two values of k".into()));
    }
    let (n, d, m) = (op.n(), op.d(), op.m());
    let mut rows = Vec::new();
    for &k in ks {
        let u = seq(k)?;
        if u.m() != m || u.grid().n() != n {
            return Err(Error::DimensionMismatch("sequence does not match the operator".into()));
        }
        let grid = u.grid();
        let battery = gaussian_battery(n, m, &eta.center);
        let p: Vec<f64> = battery.iter().map(|t| pair_weak(&u, &|x: &[f64], o: &mut [f64]| t.eval(x, o))).collect::<Result<_>>()?;
        let mut g = vec![0.0; grid.len() * d];
        let mut x = vec![0.0; n];
        let mut de = vec![0.0; n];
        for (flat, v) in u.values().chunks_exact(m).enumerate() {
            if !u.mask()[flat] {
                continue;
            }
            grid.node_into(flat, &mut x);
            eta.grad(&x, &mut de);
            for (i, a) in op.coeffs().iter().enumerate() {
                if de[i] == 0.0 {
                    continue;
                }
                for r in 0..d {
                    g[flat * d + r] += de[i] * (0..m).map(|c| a[(r, c)] * v[c]).sum::<f64>();
                }
            }
        }
        rows.push(TruncationRow {
            k,
            l2_norm: lp_norm(&u, 2.0)?,
            negative_norm: hminus1_dual_norm_masked(&g, d, grid, u.mask())?,
            max_pairing: p.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        });
    }
    Ok(finish_truncation(rows))
}

fn finish_truncation(rows: Vec<TruncationRow>) -> TruncationReport {
    let first = rows[0].max_pairing;
    let last = rows[rows.len() - 1].max_pairing;
    let precondition_violated = last > 0.5 * first;
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.negative_norm > 0.0).map(|r| ((r.k as f64).ln(), r.negative_norm.ln())).collect();
    let rate = slope(&pts);
    let decreasing = rows[rows.len() - 1].negative_norm < rows[0].negative_norm;
    TruncationReport { rows, rate, decreasing, precondition_violated }
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Coarse partition of a box into `per_axis^n` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPartition {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub per_axis: usize,
}

impl CellPartition {
    pub fn cell_of(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for a in 0..self.lo.len() {
            let t = (x[a] - self.lo[a]) / (self.hi[a] - self.lo[a]);
            let j = ((t * self.per_axis as f64).floor().max(0.0) as usize).min(self.per_axis - 1);
            idx = idx * self.per_axis + j;
        }
        idx
    }
    pub fn len(&self) -> usize {
        self.per_axis.pow(self.lo.len() as u32)
    }
    pub fn is_empty(&self) -> bool {
        self.per_axis == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMass {
    /// `||u||_p^p` by the quadrature the histogram uses.
    pub total: f64,
    pub band_fraction: f64,
    pub histogram: Vec<f64>,
}

/// Mass of `|u|^p` in the nodes within `band_width` mesh widths of the mask
/// boundary, and its distribution over `cells`.
pub fn boundary_mass(u: &DomainField, band_width: f64, p: f64, cells: &CellPartition) -> Result<BoundaryMass> {
    if band_width < 2.0 {
        return Err(Error::InvalidArgument("band width must be at least 2h".into()));
    }
    let band = u.boundary_band(band_width);
    let grid = u.grid();
    let m = u.m();
    let w = grid.cell_volume();
    let mut hist = vec![0.0; cells.len()];
    let (mut total, mut inband) = (0.0, 0.0);
    let mut x = vec![0.0; grid.n()];
    for (flat, v) in u.values().chunks_exact(m).enumerate() {
        if !u.mask()[flat] {
            continue;
        }
        grid.node_into(flat, &mut x);
        let e = w * v.iter().map(|t| t * t).sum::<f64>().powf(0.5 * p);
        total += e;
        hist[cells.cell_of(&x)] += e;
        if band[flat] {
            inband += e;
        }
    }
    Ok(BoundaryMass { total, band_fraction: if total > 0.0 { inband / total } else { 0.0 }, histogram: hist })
}

/// Same diagnostic for arbitrary quadrature fields; the band is given by a predicate.
pub fn boundary_mass_at(
    u: &dyn SampledField,
    in_band: &dyn Fn(&[f64]) -> bool,
    p: f64,
    cells: &CellPartition,
) -> BoundaryMass {
    let mut hist = vec![0.0; cells.len()];
    let (mut total, mut inband) = (0.0, 0.0);
    u.for_each_sample(&mut |x, v, w| {
        let e = w * v.iter().map(|t| t * t).sum::<f64>().powf(0.5 * p);
        total += e;
        hist[cells.cell_of(x)] += e;
        if in_band(x) {
            inband += e;
        }
    });
    BoundaryMass { total, band_fraction: if total > 0.0 { inband / total } else { 0.0 }, histogram: hist }
}

/// Distance from an interior point to the boundary of an analytic domain.
pub fn boundary_distance(domain: &DomainSpec, x: &[f64]) -> Option<f64> {
    let norm = |v: &[f64], c: &[f64]| v.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    match domain {
        DomainSpec::Ball { center, radius } => Some(radius - norm(x, center)),
        DomainSpec::HalfBall { center, radius, normal } => {
            let nn = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
            let flat = -x.iter().zip(center).zip(normal).map(|((a, c), v)| (a - c) * v / nn).sum::<f64>();
            Some((radius - norm(x, center)).min(flat))
        }
        DomainSpec::Rect { lo, hi } => {
            Some(x.iter().zip(lo.iter().zip(hi)).map(|(v, (a, b))| (v - a).min(b - v)).fold(f64::INFINITY, f64::min))
        }
        DomainSpec::Mask => None,
    }
}

/// Hybrid boundary mass for the singular sequence: `B(x_b, radius / 8)` is
/// integrated in polar coordinates and credited to the cell of `x_b`, the
/// remaining nodes of `grid` by the midpoint rule. The band fraction uses
/// the polar band mass of width `band_width * h`.
pub fn cr_boundary_mass(u: &CrField, grid: &GridSpec, band_width: f64, cells: &CellPartition) -> Result<BoundaryMass> {
    if band_width < 2.0 {
        return Err(Error::InvalidArgument("band width must be at least 2h".into()));
    }
    let s = 0.125;
    let xb = u.boundary_point();
    let near = u.mass_near_boundary_point(s);
    let mut hist = vec![0.0; cells.len()];
    hist[cells.cell_of(&xb)] += near;
    let mut total = near;
    let dom = u.domain();
    let w = grid.cell_volume();
    let mut x = vec![0.0; 2];
    for flat in 0..grid.len() {
        grid.node_into(flat, &mut x);
        if !dom.contains(&x) || crate::profiles::dist(&x, &xb) < s * u.radius {
            continue;
        }
        let v = u.value_at(&x);
        let e = w * (v[0] * v[0] + v[1] * v[1]);
        total += e;
        hist[cells.cell_of(&x)] += e;
    }
    let band = u.band_mass(band_width * grid.h_max());
    Ok(BoundaryMass { total, band_fraction: band / u.l2_norm_sq(), histogram: hist })
}

fn neg_square(n: usize, m: usize) -> Result<HomogeneousIntegrand> {
    HomogeneousIntegrand::new(Arc::new(NormPower { p: 2.0, sign: -1.0 }), m, n)
}

/// The singular sequence on the unit disk for each `k`: polar-quadrature norm,
/// `I(u_k)` for `h = -|s|^2`, battery pairings and boundary-band fraction
/// (band of `2h` on a `size^2` grid). With `op`, also the negative norm of
/// `A u_k` sampled on that grid.
pub fn cr_demo(ks: &[u32], size: usize, tol: f64, op: Option<&OperatorA>) -> Result<(Vec<CrField>, SequenceReport)> {
    let domain = DomainSpec::unit_disk();
    let v = neg_square(2, 2)?;
    let battery = gaussian_battery(2, 2, &[1.0, 0.0]);
    let mut fields = Vec::new();
    let mut rows = Vec::new();
    for &k in ks {
        let f = cr_singular_sequence(&domain, k, tol)?;
        let grid = f.default_grid(size)?;
        let negative_norm = match op {
            Some(op) => Some(hminus1_norm_domain(op, &f.sample(&grid)?)?),
            None => None,
        };
        rows.push(SequenceRow {
            k,
            lp_norm: f.l2_norm_sq().sqrt(),
            integrals: vec![f.integral(&v)?],
            pairings: battery.iter().map(|t| f.pair(&|x: &[f64], o: &mut [f64]| t.eval(x, o))).collect(),
            negative_norm,
            boundary_fraction: Some(f.band_mass(2.0 * grid.h_max()) / f.l2_norm_sq()),
        });
        fields.push(f);
    }
    let report = SequenceReport {
        meta: SequenceMeta {
            generator: "cr".into(),
            domain: Some(domain),
            operator: Some("cauchy_riemann".into()),
            p: 2.0,
            integrands: vec!["neg_norm_sq".into()],
            grid: Some(size),
            params: serde_json::json!({
                "tol": tol,
                "boundary_point": [1.0, 0.0],
                "ln_dist": fields.iter().map(|f| f.ln_dist).collect::<Vec<_>>(),
                "battery": battery,
            }),
        },
        rows,
    };
    Ok((fields, report))
}

/// Base field for the dilation demo: a smooth bump profile in the unit ball.
pub fn dilation_base(size: usize) -> Result<DomainField> {
    let dom = DomainSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 };
    let g = dom.grid(size, 0.0)?;
    DomainField::from_fn(dom, g, 2, |x, o| {
        let b = poly_bump(x, &[0.0, 0.0], 0.9, 3);
        o[0] = b * (1.0 + x[0]);
        o[1] = b * (0.5 - x[1]);
    })
}

/// Dilations of [`dilation_base`] at `x0` into the unit disk: norm,
/// `I(u_k)` for `h = -|s|^2`, pairings and the fraction of mass within
/// `band` of the boundary.
pub fn dilation_demo(ks: &[u32], size: usize, x0: &[f64], band: f64) -> Result<SequenceReport> {
    let target = DomainSpec::unit_disk();
    let base = dilation_base(size)?;
    let v = neg_square(2, 2)?;
    let battery = gaussian_battery(2, 2, x0);
    let cells = CellPartition { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0], per_axis: 4 };
    let mut rows = Vec::new();
    for &k in ks {
        let u = dilation_sequence(&base, x0, k, 2.0, &target)?;
        let bm = boundary_mass_at(&u, &|x| boundary_distance(&target, x).is_some_and(|d| d < band), 2.0, &cells);
        rows.push(SequenceRow {
            k,
            lp_norm: lp_norm(&u, 2.0)?,
            integrals: vec![functional_eval(v.inner().as_ref(), &u, None)?],
            pairings: battery
                .iter()
                .map(|t| pair_weak(&u, &|x: &[f64], o: &mut [f64]| t.eval(x, o)))
                .collect::<Result<_>>()?,
            negative_norm: None,
            boundary_fraction: Some(bm.band_fraction),
        });
    }
    Ok(SequenceReport {
        meta: SequenceMeta {
            generator: "dilation".into(),
            domain: Some(target),
            operator: None,
            p: 2.0,
            integrands: vec!["neg_norm_sq".into()],
            grid: Some(size),
            params: serde_json::json!({ "x0": x0, "band": band }),
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_deterministic_and_avoids_point() {
        let a = gaussian_battery(2, 2, &[1.0, 0.0]);
        assert_eq!(a, gaussian_battery(2, 2, &[1.0, 0.0]));
        assert_eq!(a.len(), 10);
        assert!(a.iter().all(|t| crate::profiles::dist(&t.center, &[1.0, 0.0]) >= 0.75));
    }

    #[test]
    fn weak_nullity_flags() {
        let decaying = vec![vec![1.0, -2.0], vec![0.5, -1.05], vec![0.05, -0.1]];
        assert_eq!(weakly_null(&decaying, 0.1, 10.0), vec![true, true]);
        let flat = vec![vec![1.0], vec![1.0], vec![1.0]];
        assert_eq!(weakly_null(&flat, 0.1, 10.0), vec![false]);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = SequenceReport {
            meta: SequenceMeta {
                generator: "t".into(),
                domain: None,
                operator: None,
                p: 2.0,
                integrands: vec!["a".into()],
                grid: None,
                params: serde_json::Value::Null,
            },
            rows: vec![SequenceRow {
                k: 1,
                lp_norm: 1.0,
                integrals: vec![-1.0],
                pairings: vec![0.5],
                negative_norm: None,
                boundary_fraction: Some(0.25),
            }],
        };
        let text = String::from_utf8(r.to_csv().unwrap()).unwrap();
        assert_eq!(text, "k,lp_norm,I_a,pair_0,negative_norm,boundary_fraction\n1,1,-1,0.5,,0.25\n");
    }

    #[test]
    fn fixed_field_has_constant_band_share() {
        let dom = DomainSpec::unit_disk();
        let g = dom.grid(64, 0.125).unwrap();
        let u = DomainField::from_fn(dom, g.clone(), 1, |x, o| o[0] = 1.0 + x[0]).unwrap();
        let cells = CellPartition { lo: g.lo.clone(), hi: g.hi.clone(), per_axis: 5 };
        let a = boundary_mass(&u, 2.0, 2.0, &cells).unwrap();
        let b = boundary_mass(&u, 2.0, 2.0, &cells).unwrap();
        assert_eq!(a, b);
        let sum: f64 = a.histogram.iter().sum();
        assert!((sum - a.total).abs() <= 1e-10 * a.total);
        assert!(a.band_fraction > 0.0 && a.band_fraction < 0.3);
    }

    #[test]
    fn constant_sequence_violates_weak_nullity() {
        let dom = DomainSpec::unit_disk();
        let g = dom.grid(32, 0.125).unwrap();
        let op = crate::symbol::catalog("cauchy_riemann", None).unwrap();
        let seq = |_k: u32| {
            DomainField::from_fn(dom.clone(), g.clone(), 2, |_, o| {
                o[0] = 1.0;
                o[1] = 0.0;
            })
        };
        let eta = Cutoff { center: vec![1.0, 0.0], r_in: 0.25, r_out: 0.5 };
        let r = truncation_decay(&op, &seq, &eta, &[1, 2, 4]).unwrap();
        assert!(r.precondition_violated);
    }
}
