//! Integrands `h(x, s)` with `p`-growth, recession functions, and the
//! functional `I(u) = int h(x, u(x)) dx`.

mod expr;

use std::fmt::Debug;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use expr::Expr;

use crate::error::{Error, Result};
use crate::fields::SampledField;
use crate::symbol::sample_unit_sphere;

/// An integrand `h(x, s)` with growth exponent `p`.
pub trait Integrand: Send + Sync + Debug {
    fn name(&self) -> String;
    fn p(&self) -> f64;
    /// Number of field components, `None` when any length is accepted.
    fn m(&self) -> Option<usize>;
    fn eval(&self, x: &[f64], s: &[f64]) -> f64;

    /// Gradient in `s`; central differences unless overridden.
    fn grad(&self, x: &[f64], s: &[f64], out: &mut [f64]) {
        let scale = s.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let step = 1e-6 * scale;
        let mut t = s.to_vec();
        for i in 0..s.len() {
            t[i] = s[i] + step;
            let fp = self.eval(x, &t);
            t[i] = s[i] - step;
            let fm = self.eval(x, &t);
            t[i] = s[i];
            out[i] = (fp - fm) / (2.0 * step);
        }
    }

    /// Constant `C` with `|h(x, s)| <= C (1 + |s|^p)`.
    fn growth_constant(&self) -> f64 {
        1.0
    }

    /// Analytic recession function, when known.
    fn recession(&self, _x: &[f64], _s: &[f64]) -> Option<f64> {
        None
    }

    fn depends_on_x(&self) -> bool {
        false
    }
}

/// `sign * |s|^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormPower {
    pub p: f64,
    pub sign: f64,
}

impl Integrand for NormPower {
    fn name(&self) -> String {
        if self.sign < 0.0 {
            format!("-|s|^{}", self.p)
        } else {
            format!("|s|^{}", self.p)
        }
    }
    fn p(&self) -> f64 {
        self.p
    }
    fn m(&self) -> Option<usize> {
        None
    }
    fn eval(&self, _x: &[f64], s: &[f64]) -> f64 {
        let r2: f64 = s.iter().map(|v| v * v).sum();
        self.sign * if self.p == 2.0 { r2 } else { r2.powf(self.p / 2.0) }
    }
    fn grad(&self, _x: &[f64], s: &[f64], out: &mut [f64]) {
        let r2: f64 = s.iter().map(|v| v * v).sum();
        let f = if self.p == 2.0 {
            2.0
        } else if r2 == 0.0 {
            0.0
        } else {
            self.p * r2.powf(self.p / 2.0 - 1.0)
        };
        for (o, v) in out.iter_mut().zip(s) {
            *o = self.sign * f * v;
        }
    }
    fn growth_constant(&self) -> f64 {
        1.0
    }
    fn recession(&self, x: &[f64], s: &[f64]) -> Option<f64> {
        Some(self.eval(x, s))
    }
}

/// Layout of a 2x2 matrix inside the field vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixLayout {
    /// `(F11, F12, F21, F22)`.
    Full,
    /// `(w11, w12, w22)` of a symmetric matrix.
    Symmetric,
}

/// `det F` on 2x2 matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Det2 {
    pub layout: MatrixLayout,
}

impl Integrand for Det2 {
    fn name(&self) -> String {
        match self.layout {
            MatrixLayout::Full => "det2".into(),
            MatrixLayout::Symmetric => "det2_sym".into(),
        }
    }
    fn p(&self) -> f64 {
        2.0
    }
    fn m(&self) -> Option<usize> {
        Some(match self.layout {
            MatrixLayout::Full => 4,
            MatrixLayout::Symmetric => 3,
        })
    }
    fn eval(&self, _x: &[f64], s: &[f64]) -> f64 {
        match self.layout {
            MatrixLayout::Full => s[0] * s[3] - s[1] * s[2],
            MatrixLayout::Symmetric => s[0] * s[2] - s[1] * s[1],
        }
    }
    fn grad(&self, _x: &[f64], s: &[f64], out: &mut [f64]) {
        match self.layout {
            MatrixLayout::Full => out.copy_from_slice(&[s[3], -s[2], -s[1], s[0]]),
            MatrixLayout::Symmetric => out.copy_from_slice(&[s[2], -2.0 * s[1], s[0]]),
        }
    }
    fn recession(&self, x: &[f64], s: &[f64]) -> Option<f64> {
        Some(self.eval(x, s))
    }
}

/// Cofactor matrix of a row-major `n x n` matrix (n = 2 or 3).
pub fn cofactor(f: &[f64], n: usize) -> Vec<f64> {
    match n {
        2 => vec![f[3], -f[2], -f[1], f[0]],
        3 => {
            let a = |i: usize, j: usize| f[3 * i + j];
            let mut c = vec![0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                    let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                    c[3 * i + j] = a(i1, j1) * a(i2, j2) - a(i1, j2) * a(i2, j1);
                }
            }
            c
        }
        _ => panic!("cofactor only implemented for n = 2, 3"),
    }
}

/// Direction field entering the cofactor integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalField {
    /// `nu(x) = x`, the outer normal of the unit ball on its boundary.
    Radial,
    Constant(Vec<f64>),
}

/// `h(x, F) = a(x) . (Cof F) nu(x)` with `a` affine: `a_i(x) = c_i0 + sum_j c_ij x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CofactorNormal {
    pub n: usize,
    pub a: Vec<Vec<f64>>,
    pub normal: NormalField,
}

impl CofactorNormal {
    pub fn new(a: Vec<Vec<f64>>, normal: NormalField) -> Result<Self> {
        let n = a.len();
        if !(n == 2 || n == 3) || a.iter().any(|r| r.len() != n + 1) {
            return Err(Error::InvalidArgument("cofactor field needs n in {2, 3} rows of n + 1 coefficients".into()));
        }
        if let NormalField::Constant(v) = &normal {
            if v.len() != n {
                return Err(Error::DimensionMismatch("normal has the wrong length".into()));
            }
        }
        Ok(Self { n, a, normal })
    }

    pub fn a_at(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| row[0] + row[1..].iter().zip(x).map(|(c, v)| c * v).sum::<f64>()).collect()
    }

    pub fn normal_at(&self, x: &[f64]) -> Vec<f64> {
        match &self.normal {
            NormalField::Radial => x.to_vec(),
            NormalField::Constant(v) => v.clone(),
        }
    }
}

impl Integrand for CofactorNormal {
    fn name(&self) -> String {
        "cofactor_normal".into()
    }
    fn p(&self) -> f64 {
        2.0
    }
    fn m(&self) -> Option<usize> {
        Some(self.n * self.n)
    }
    fn eval(&self, x: &[f64], s: &[f64]) -> f64 {
        let c = cofactor(s, self.n);
        let a = self.a_at(x);
        let nu = self.normal_at(x);
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += a[i] * c[i * self.n + j] * nu[j];
            }
        }
        acc
    }
    fn growth_constant(&self) -> f64 {
        let amax: f64 = self.a.iter().flatten().map(|v| v.abs()).sum();
        let nmax = match &self.normal {
            NormalField::Radial => 2.0,
            NormalField::Constant(v) => v.iter().map(|t| t.abs()).sum(),
        };
        (amax * nmax * 3.0).max(1.0)
    }
    // Cof is linear for n = 2, so the quadratic recession vanishes there
    fn recession(&self, x: &[f64], s: &[f64]) -> Option<f64> {
        Some(if self.n == 3 { self.eval(x, s) } else { 0.0 })
    }
    fn depends_on_x(&self) -> bool {
        true
    }
}

/// User integrand given by an [`Expr`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExprIntegrand {
    pub source: String,
    pub expr: Expr,
    pub p: f64,
    pub m: usize,
}

impl ExprIntegrand {
    pub fn new(source: &str, p: f64, m: Option<usize>) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("growth exponent {p} must exceed 1")));
        }
        let expr = Expr::parse(source)?;
        let need = expr.num_components();
        let m = m.unwrap_or(need.max(1));
        if need > m {
            return Err(Error::DimensionMismatch(format!("expression uses s{} but m = {m}", need - 1)));
        }
        Ok(Self { source: source.to_string(), expr, p, m })
    }
}

impl Integrand for ExprIntegrand {
    fn name(&self) -> String {
        self.source.clone()
    }
    fn p(&self) -> f64 {
        self.p
    }
    fn m(&self) -> Option<usize> {
        Some(self.m)
    }
    fn eval(&self, x: &[f64], s: &[f64]) -> f64 {
        self.expr.eval(x, s)
    }
    fn depends_on_x(&self) -> bool {
        self.expr.num_coordinates() > 0
    }
}

/// Catalog names accepted by [`IntegrandSpec::build`].
pub const INTEGRAND_CATALOG: &[&str] = &["norm_pow", "neg_norm_pow", "det2", "det2_sym", "cofactor_normal", "expr"];

/// JSON description of an integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Affine coefficients of the cofactor weight `a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<NormalField>,
}

impl IntegrandSpec {
    pub fn named(name: &str) -> Self {
        Self { name: name.into(), p: None, expr: None, m: None, a: None, normal: None }
    }

    pub fn build(&self) -> Result<Arc<dyn Integrand>> {
        Ok(match self.name.as_str() {
            "norm_pow" => Arc::new(NormPower { p: self.p.unwrap_or(2.0), sign: 1.0 }),
            "neg_norm_pow" => Arc::new(NormPower { p: self.p.unwrap_or(2.0), sign: -1.0 }),
            "det2" => Arc::new(Det2 { layout: MatrixLayout::Full }),
            "det2_sym" => Arc::new(Det2 { layout: MatrixLayout::Symmetric }),
            "cofactor_normal" => {
                let a = self
                    .a
                    .clone()
                    .unwrap_or_else(|| vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 0.0]]);
                Arc::new(CofactorNormal::new(a, self.normal.clone().unwrap_or(NormalField::Radial))?)
            }
            "expr" => {
                let src = self.expr.as_deref().ok_or_else(|| Error::InvalidArgument("expr integrand needs 'expr'".into()))?;
                Arc::new(ExprIntegrand::new(src, self.p.unwrap_or(2.0), self.m)?)
            }
            other => return Err(Error::InvalidArgument(format!("unknown integrand '{other}'"))),
        })
    }
}

/// An integrand verified to be positively `p`-homogeneous in `s`.
#[derive(Debug, Clone)]
pub struct HomogeneousIntegrand {
    inner: Arc<dyn Integrand>,
    m: usize,
}

impl HomogeneousIntegrand {
    /// Checks `v(x, t s) = t^p v(x, s)` for `t in {0.5, 2, 7}` on sampled
    /// unit `s` and `x`, and `v(x, 0) = 0`.
    pub fn new(inner: Arc<dyn Integrand>, m: usize, n: usize) -> Result<Self> {
        if inner.m().is_some_and(|k| k != m) {
            return Err(Error::DimensionMismatch(format!("integrand expects m = {:?}, got {m}", inner.m())));
        }
        let p = inner.p();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6f6d6f67);
        let xs: Vec<Vec<f64>> = std::iter::once(vec![0.0; n])
            .chain((0..4).map(|_| sample_unit_sphere(&mut rng, n).into_iter().map(|v| 0.5 * v).collect()))
            .collect();
        for x in &xs {
            let z = inner.eval(x, &vec![0.0; m]);
            if z.abs() > 1e-12 {
                return Err(Error::Precondition(format!("{} does not vanish at s = 0 (value {z})", inner.name())));
            }
            for _ in 0..16 {
                let s = sample_unit_sphere(&mut rng, m);
                let base = inner.eval(x, &s);
                for t in [0.5, 2.0, 7.0] {
                    let ts: Vec<f64> = s.iter().map(|v| t * v).collect();
                    let lhs = inner.eval(x, &ts);
                    let rhs = t.powf(p) * base;
                    if !(lhs - rhs).abs().le(&(1e-10 * rhs.abs().max(t.powf(p)))) {
                        return Err(Error::Precondition(format!(
                            "{} is not {p}-homogeneous: v(t s) = {lhs}, t^p v(s) = {rhs} at t = {t}",
                            inner.name()
                        )));
                    }
                }
            }
        }
        Ok(Self { inner, m })
    }

    pub fn from_spec(spec: &IntegrandSpec, m: usize, n: usize) -> Result<Self> {
        Self::new(spec.build()?, m, n)
    }

    pub fn inner(&self) -> &Arc<dyn Integrand> {
        &self.inner
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn p(&self) -> f64 {
        self.inner.p()
    }
    pub fn name(&self) -> String {
        self.inner.name()
    }
    pub fn eval(&self, x: &[f64], s: &[f64]) -> f64 {
        self.inner.eval(x, s)
    }
    pub fn grad(&self, x: &[f64], s: &[f64], out: &mut [f64]) {
        self.inner.grad(x, s, out)
    }
}

/// Result of probing `h(x, t s) / t^p` along increasing scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecessionEstimate {
    pub estimate: f64,
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
    /// `|values[i+1] - values[i]|`.
    pub differences: Vec<f64>,
    pub converged: bool,
}

pub fn recession_estimate(h: &dyn Integrand, x: &[f64], s: &[f64], t_schedule: &[f64]) -> Result<RecessionEstimate> {
    if t_schedule.len() < 3 || t_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("need at least three increasing scales".into()));
    }
    let tmax = *t_schedule.last().expect("nonempty");
    if tmax < 1e3 {
        return Err(Error::InvalidArgument("largest scale must be at least 1e3".into()));
    }
    let p = h.p();
    let mut values = Vec::with_capacity(t_schedule.len());
    for &t in t_schedule {
        let ts: Vec<f64> = s.iter().map(|v| t * v).collect();
        let v = h.eval(x, &ts) / t.powf(p);
        if !v.is_finite() {
            return Err(Error::ScaleLimit(t));
        }
        values.push(v);
    }
    let differences: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let last = *values.last().expect("nonempty");
    let tiny = 1e-12 * last.abs().max(1.0);
    let converged = differences.windows(2).all(|w| w[1] <= w[0] * 1.000001 + tiny);
    Ok(RecessionEstimate { estimate: last, scales: t_schedule.to_vec(), values, differences, converged })
}

/// `I(u) = sum_samples h(x, u(x)) w`, optionally restricted by `region`.
pub fn functional_eval(
    h: &dyn Integrand,
    u: &dyn SampledField,
    region: Option<&(dyn Fn(&[f64]) -> bool + Sync)>,
) -> Result<f64> {
    if let Some(m) = h.m() {
        if m != u.components() {
            return Err(Error::DimensionMismatch(format!("integrand expects {m} components, field has {}", u.components())));
        }
    }
    let mut s = 0.0;
    let mut bad = false;
    u.for_each_sample(&mut |x, v, w| {
        if region.is_none_or(|r| r(x)) {
            let val = h.eval(x, v);
            if !val.is_finite() {
                bad = true;
            }
            s += val * w;
        }
    });
    if bad {
        return Err(Error::NonFinite(format!("integrand {}", h.name())));
    }
    Ok(s)
}

/// One row of the Nemytskii continuity probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NemytskiiRow {
    pub index: usize,
    pub lp_gap: f64,
    pub l1_gap: f64,
}

/// `||h(., u_k) - h(., v_k)||_{L^1}` against `||u_k - v_k||_{L^p}`.
///
/// Both fields of a pair must share their quadrature points. Sequences whose
/// `L^p` norms exceed `bound` are rejected.
pub fn nemytskii_continuity_probe(
    h: &HomogeneousIntegrand,
    u_seq: &[&dyn SampledField],
    v_seq: &[&dyn SampledField],
    bound: f64,
) -> Result<Vec<NemytskiiRow>> {
    if u_seq.len() != v_seq.len() {
        return Err(Error::DimensionMismatch("sequences have different lengths".into()));
    }
    let p = h.p();
    let collect = |f: &dyn SampledField| {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        let mut ws = Vec::new();
        f.for_each_sample(&mut |x, v, w| {
            xs.extend_from_slice(x);
            vs.extend_from_slice(v);
            ws.push(w);
        });
        (xs, vs, ws)
    };
    let mut rows = Vec::with_capacity(u_seq.len());
    for (k, (u, v)) in u_seq.iter().zip(v_seq).enumerate() {
        let (xu, vu, wu) = collect(*u);
        let (xv, vv, wv) = collect(*v);
        if xu != xv || wu != wv {
            return Err(Error::DimensionMismatch(format!("pair {k} uses different quadrature points")));
        }
        let m = u.components();
        let n = u.dim();
        let (mut lp_u, mut lp_v, mut lp_gap, mut l1) = (0.0, 0.0, 0.0, 0.0);
        for (i, &w) in wu.iter().enumerate() {
            let a = &vu[i * m..(i + 1) * m];
            let b = &vv[i * m..(i + 1) * m];
            let x = &xu[i * n..(i + 1) * n];
            let na = a.iter().map(|t| t * t).sum::<f64>().sqrt();
            let nb = b.iter().map(|t| t * t).sum::<f64>().sqrt();
            let nd = a.iter().zip(b).map(|(s, t)| (s - t) * (s - t)).sum::<f64>().sqrt();
            lp_u += na.powf(p) * w;
            lp_v += nb.powf(p) * w;
            lp_gap += nd.powf(p) * w;
            l1 += (h.eval(x, a) - h.eval(x, b)).abs() * w;
        }
        let (nu, nv) = (lp_u.powf(1.0 / p), lp_v.powf(1.0 / p));
        if !(nu <= bound && nv <= bound) {
            return Err(Error::Precondition(format!("pair {k} is not bounded by {bound} in L^p ({nu}, {nv})")));
        }
        rows.push(NemytskiiRow { index: k, lp_gap: lp_gap.powf(1.0 / p), l1_gap: l1 });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{GridSpec, PeriodicField};

    #[test]
    fn recession_examples() {
        let h = ExprIntegrand::new("s0*s0 + s1*s1 + pow(s0*s0 + s1*s1, 0.5)", 2.0, None).unwrap();
        let sched = [10.0, 100.0, 1e3, 1e4];
        let r = recession_estimate(&h, &[0.0, 0.0], &[0.6, 0.8], &sched).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-3);
        assert!(r.converged);
        let d = Det2 { layout: MatrixLayout::Full };
        let r = recession_estimate(&d, &[], &[0.5, 0.5, -0.5, 0.5], &sched).unwrap();
        assert!(r.values.iter().all(|&v| (v - 0.5).abs() < 1e-15));
        let neg = NormPower { p: 2.0, sign: -1.0 };
        let r = recession_estimate(&neg, &[], &[0.0, 1.0], &sched).unwrap();
        assert!((r.estimate + 1.0).abs() < 1e-15);
        let blow = ExprIntegrand::new("pow(10, s0*s0)", 2.0, Some(1)).unwrap();
        assert!(matches!(recession_estimate(&blow, &[], &[1.0], &sched), Err(Error::ScaleLimit(_))));
    }

    #[test]
    fn homogeneity_check() {
        let ok = IntegrandSpec::named("neg_norm_pow");
        assert!(HomogeneousIntegrand::from_spec(&ok, 2, 2).is_ok());
        let bad = IntegrandSpec { expr: Some("s0*s0 + s1".into()), ..IntegrandSpec::named("expr") };
        assert!(HomogeneousIntegrand::from_spec(&bad, 2, 2).is_err());
        assert!(HomogeneousIntegrand::new(Arc::new(Det2 { layout: MatrixLayout::Full }), 4, 2).is_ok());
        let cof = IntegrandSpec::named("cofactor_normal");
        assert!(HomogeneousIntegrand::from_spec(&cof, 9, 3).is_ok());
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let x = [0.3, -0.2, 0.1];
        let cases: Vec<(Box<dyn Integrand>, Vec<f64>)> = vec![
            (Box::new(NormPower { p: 3.0, sign: -1.0 }), vec![0.3, -1.2]),
            (Box::new(Det2 { layout: MatrixLayout::Full }), vec![0.3, -1.2, 0.7, 2.0]),
            (Box::new(Det2 { layout: MatrixLayout::Symmetric }), vec![0.3, -1.2, 0.7]),
        ];
        for (h, s) in cases {
            let mut g = vec![0.0; s.len()];
            h.grad(&x, &s, &mut g);
            for i in 0..s.len() {
                let mut a = s.clone();
                a[i] += 1e-6;
                let mut b = s.clone();
                b[i] -= 1e-6;
                let fd = (h.eval(&x, &a) - h.eval(&x, &b)) / 2e-6;
                assert!((fd - g[i]).abs() < 1e-6, "{} component {i}", h.name());
            }
        }
    }

    #[test]
    fn functional_on_unit_field() {
        let g = GridSpec::unit_cube(2, 8).unwrap();
        let u = PeriodicField::from_fn(g, 2, |_, o| o.copy_from_slice(&[1.0, 0.0])).unwrap();
        let h = NormPower { p: 2.0, sign: 1.0 };
        assert!((functional_eval(&h, &u, None).unwrap() - 1.0).abs() < 1e-14);
        let left = |x: &[f64]| x[0] < 0.0;
        assert!((functional_eval(&h, &u, Some(&left)).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn cofactor_3d_matches_minors() {
        let f = [2.0, 1.0, 0.0, -1.0, 3.0, 4.0, 0.5, 0.0, 1.0];
        let c = cofactor(&f, 3);
        // F^T Cof F = det F * I
        let det = 2.0 * (3.0 - 0.0) - 1.0 * (-1.0 - 2.0) + 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| f[3 * k + i] * c[3 * k + j]).sum();
                assert!((v - if i == j { det } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
