//! Periodic boundary tester on the unit cube with `e_1` along the normal.
//!
//! Fields are `phi = c + T psi`; the objective is `int_{Q^-} v(phi) + eps |phi|^2`
//! over `||phi||^2_Q`, with the outer mass `int_{Q \ Q/2} |phi|^2` constrained
//! to at most `gamma^2 ||phi||^2_Q`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::descent::{descend, Objective, Workspace};
use super::seeds::{seed_plan, seed_values};
use super::{
    check_positive, rel_close, unit_normal, CertParams, Certificate, Revalidation, SearchConfig, SearchResult, Status,
    Tester, TraceSummary,
};
use crate::error::{Error, Result};
use crate::fields::{AnyField, GridSpec, PeriodicField};
use crate::integrand::HomogeneousIntegrand;
use crate::projection::AfreeProjector;
use crate::symbol::ConstantRankOperator;

/// Householder reflection mapping `e_1` to `nu`.
pub(crate) fn reflection_to(nu: &[f64]) -> DMatrix<f64> {
    let n = nu.len();
    let mut w: Vec<f64> = nu.iter().map(|v| -v).collect();
    w[0] += 1.0;
    let w2: f64 = w.iter().map(|v| v * v).sum();
    let mut h = DMatrix::identity(n, n);
    if w2 > 1e-28 {
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] -= 2.0 * w[i] * w[j] / w2;
            }
        }
    }
    h
}

fn is_lower(y: &[f64]) -> bool {
    y[0] < 0.0
}

fn is_outer(y: &[f64]) -> bool {
    y.iter().any(|t| t.abs() >= 0.25)
}

struct Setup<'a> {
    v: &'a HomogeneousIntegrand,
    proj: AfreeProjector,
    lower: Vec<bool>,
    outer: Vec<bool>,
    eval_points: Vec<f64>,
    m: usize,
    n: usize,
    hn: f64,
    eps: f64,
    gamma: f64,
}

struct Parts {
    r: f64,
    l: f64,
    o: f64,
}

impl Setup<'_> {
    fn parts(&self, x: &[f64], grad: Option<(&mut [f64], f64)>) -> Parts {
        let m = self.m;
        let (mut r, mut l, mut o) = (0.0, 0.0, 0.0);
        for (j, phi) in x.chunks_exact(m).enumerate() {
            let s2: f64 = phi.iter().map(|t| t * t).sum();
            l += s2;
            if self.outer[j] {
                o += s2;
            }
            if self.lower[j] {
                r += self.v.eval(&self.eval_points[j * self.n..(j + 1) * self.n], phi) + self.eps * s2;
            }
        }
        let (r, l, o) = (r * self.hn, l * self.hn, o * self.hn);
        if let Some((g, mu)) = grad {
            let q = r / l;
            let active = o / l > self.gamma * self.gamma;
            let mut dv = vec![0.0; m];
            for (j, phi) in x.chunks_exact(m).enumerate() {
                if self.lower[j] {
                    self.v.grad(&self.eval_points[j * self.n..(j + 1) * self.n], phi, &mut dv);
                } else {
                    dv.fill(0.0);
                }
                for c in 0..m {
                    let dl = 2.0 * phi[c];
                    let dr = if self.lower[j] { dv[c] + 2.0 * self.eps * phi[c] } else { 0.0 };
                    let mut gi = (dr - q * dl) / l;
                    if active {
                        let dout = if self.outer[j] { dl } else { 0.0 };
                        gi += mu * (dout - o / l * dl) / l;
                    }
                    g[j * m + c] = gi;
                }
            }
        }
        Parts { r, l, o }
    }

    fn apply_pi(&self, x: &mut [f64]) {
        let m = self.m;
        let count = (x.len() / m) as f64;
        let mut mean = vec![0.0; m];
        for phi in x.chunks_exact(m) {
            for c in 0..m {
                mean[c] += phi[c] / count;
            }
        }
        let t = self.proj.project_values(x);
        for (j, out) in x.chunks_exact_mut(m).enumerate() {
            for c in 0..m {
                out[c] = mean[c] + t[j * m + c];
            }
        }
    }
}

impl Objective for Setup<'_> {
    fn dim(&self) -> usize {
        self.lower.len() * self.m
    }
    fn weight(&self) -> f64 {
        self.hn
    }
    fn eval(&self, x: &[f64], mu: f64, grad: Option<&mut [f64]>, _ws: &mut Workspace) -> Result<f64> {
        let p = self.parts(x, grad.map(|g| (g, mu)));
        Ok(p.r / p.l + mu * (p.o / p.l - self.gamma * self.gamma).max(0.0))
    }
    fn project(&self, x: &mut [f64]) {
        self.apply_pi(x);
    }
    fn normalize(&self, x: &mut [f64]) -> bool {
        let l = self.hn * x.iter().map(|t| t * t).sum::<f64>();
        // below this the field is numerically the zero element of the admissible space
        if !(l > 1e-24 && l.is_finite()) {
            return false;
        }
        let s = 1.0 / l.sqrt();
        x.iter_mut().for_each(|t| *t *= s);
        true
    }
}

struct RestartOutcome {
    best: Option<(f64, Vec<f64>)>,
    feasible_seen: bool,
    iterations: usize,
    history: Vec<f64>,
}

/// Periodic tester with the integrand frozen at the origin.
pub fn test_aqcb_periodic(
    op: &ConstantRankOperator,
    v: &HomogeneousIntegrand,
    normal: &[f64],
    eps: f64,
    gamma: f64,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    let n = op.op().n();
    test_aqcb_periodic_at(op, v, normal, eps, gamma, &vec![0.0; n], 0.0, cfg)
}

/// Periodic tester with the integrand evaluated at `x0 + delta * H y`, where
/// `H` rotates the cube coordinates `y` so that `e_1` points along `normal`.
#[allow(clippy::too_many_arguments)]
pub fn test_aqcb_periodic_at(
    op: &ConstantRankOperator,
    v: &HomogeneousIntegrand,
    normal: &[f64],
    eps: f64,
    gamma: f64,
    x0: &[f64],
    delta: f64,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    cfg.validate()?;
    check_positive("eps", eps)?;
    check_positive("gamma", gamma)?;
    let a = op.op();
    let (n, m) = (a.n(), a.m());
    if v.m() != m {
        return Err(Error::DimensionMismatch("integrand and operator components differ".into()));
    }
    if (v.p() - 2.0).abs() > 1e-12 {
        return Err(Error::Precondition("the periodic tester runs at p = 2".into()));
    }
    if x0.len() != n || !(delta >= 0.0) {
        return Err(Error::InvalidArgument("x0 must have length n and delta must be >= 0".into()));
    }
    let nu = unit_normal(normal, n)?;
    let h = reflection_to(&nu);
    let rotated = ConstantRankOperator::verify(a.rotated(&h)?)?;
    let grid = GridSpec::unit_cube(n, cfg.grid)?;
    let nodes = grid.nodes();
    let mut eval_points = Vec::with_capacity(nodes.len());
    for y in nodes.chunks_exact(n) {
        for i in 0..n {
            let hy: f64 = (0..n).map(|j| h[(i, j)] * y[j]).sum();
            eval_points.push(x0[i] + delta * hy);
        }
    }
    let setup = Setup {
        v,
        proj: AfreeProjector::new(&rotated, &grid)?,
        lower: nodes.chunks_exact(n).map(is_lower).collect(),
        outer: nodes.chunks_exact(n).map(is_outer).collect(),
        eval_points,
        m,
        n,
        hn: grid.cell_volume(),
        eps,
        gamma,
    };
    let plan = seed_plan(a.name(), n, grid.h(0), cfg.restarts, true);
    let e1: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
    let outcomes: Vec<Result<RestartOutcome>> = plan
        .par_iter()
        .enumerate()
        .map(|(r, &kind)| {
            let mut rng = cfg.rng(r);
            let x0 = seed_values(kind, &nodes, n, m, &e1, Some(&h), true, &mut rng);
            run_restart(&setup, x0, cfg)
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut best: Option<(usize, f64)> = None;
    for (r, o) in outcomes.iter().enumerate() {
        if let Some((val, _)) = &o.best {
            if best.is_none_or(|(_, b)| *val < b) {
                best = Some((r, *val));
            }
        }
    }
    let infeasible = !outcomes.iter().any(|o| o.feasible_seen);
    let params = CertParams {
        eps: Some(eps),
        gamma: Some(gamma),
        normal: Some(nu.clone()),
        x0: x0.to_vec(),
        delta,
        ..Default::default()
    };
    let trace = TraceSummary {
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
        restarts: plan.len(),
        seed: cfg.seed,
        best_restart: best.map(|b| b.0),
        grid: cfg.grid,
        penalty_stages: cfg.penalty_stages,
    };
    let histories = outcomes.iter().map(|o| o.history.clone()).collect();
    let mut cert = Certificate {
        tester: Tester::AqcbPeriodic,
        operator: a.name().to_string(),
        integrand: v.name(),
        status: Status::NoneFound,
        unbounded_below: false,
        marginal: false,
        infeasible,
        objective: 0.0,
        field_norm: 0.0,
        constraint_value: 0.0,
        constraint_ratio: 0.0,
        params,
        trace,
        witness_file: None,
    };
    let Some((r, val)) = best else {
        return Ok(SearchResult { certificate: cert, witness: None, histories });
    };
    let xbest = outcomes[r].best.as_ref().expect("best restart has a point").1.clone();
    let p = setup.parts(&xbest, None);
    cert.status = if val < -cfg.margin { Status::Violation } else { Status::NoneFound };
    cert.marginal = val.abs() <= cfg.margin;
    cert.objective = p.r / p.l;
    cert.field_norm = p.l.sqrt();
    cert.constraint_value = p.o.sqrt();
    cert.constraint_ratio = (p.o / p.l).sqrt();
    let witness = PeriodicField::new(grid, m, xbest)?;
    Ok(SearchResult { certificate: cert, witness: Some(AnyField::Periodic(witness)), histories })
}

fn run_restart(setup: &Setup, x0: Vec<f64>, cfg: &SearchConfig) -> Result<RestartOutcome> {
    let mut ws = Workspace::default();
    let mut x = x0;
    let mut out = RestartOutcome { best: None, feasible_seen: false, iterations: 0, history: Vec::new() };
    let gamma2 = setup.gamma * setup.gamma;
    let consider = |x: &[f64], out: &mut RestartOutcome| -> bool {
        let p = setup.parts(x, None);
        let q = p.r / p.l;
        if p.o / p.l <= gamma2 * (1.0 + 1e-9) {
            out.feasible_seen = true;
            if out.best.as_ref().is_none_or(|b| q < b.0) {
                out.best = Some((q, x.to_vec()));
            }
        }
        out.best.as_ref().is_some_and(|b| b.0 < -cfg.margin)
    };
    setup.apply_pi(&mut x);
    if !setup.normalize(&mut x) {
        return Ok(out);
    }
    if consider(&x, &mut out) {
        return Ok(out);
    }
    let mut mu = cfg.penalty_start;
    for _ in 0..cfg.penalty_stages {
        let d = descend(setup, &x, mu, cfg.max_iter, cfg.initial_step, &mut ws)?;
        out.iterations += d.iterations;
        out.history.extend(d.history);
        x = d.x;
        if consider(&x, &mut out) {
            break;
        }
        mu *= 10.0;
    }
    Ok(out)
}

/// Recomputes objective and outer-mass ratio of a periodic-tester witness.
pub fn revalidate_periodic(
    cert: &Certificate,
    witness: &AnyField,
    op: &ConstantRankOperator,
    v: &HomogeneousIntegrand,
) -> Result<Revalidation> {
    let AnyField::Periodic(w) = witness else {
        return Err(Error::InvalidArgument("periodic-tester witnesses are periodic fields".into()));
    };
    let n = op.op().n();
    let m = w.m();
    let gamma = cert.params.gamma.ok_or_else(|| Error::InvalidArgument("certificate lacks gamma".into()))?;
    let eps = cert.params.eps.ok_or_else(|| Error::InvalidArgument("certificate lacks eps".into()))?;
    let nu = cert.params.normal.as_deref().ok_or_else(|| Error::InvalidArgument("certificate lacks normal".into()))?;
    let nu = unit_normal(nu, n)?;
    let h = reflection_to(&nu);
    let hn = w.grid().cell_volume();
    let (mut r, mut l, mut o) = (0.0, 0.0, 0.0);
    let mut y = vec![0.0; n];
    let mut pt = vec![0.0; n];
    for (j, phi) in w.values().chunks_exact(m).enumerate() {
        w.grid().node_into(j, &mut y);
        let s2: f64 = phi.iter().map(|t| t * t).sum();
        l += s2;
        if is_outer(&y) {
            o += s2;
        }
        if is_lower(&y) {
            for i in 0..n {
                pt[i] = cert.params.x0[i] + cert.params.delta * (0..n).map(|k| h[(i, k)] * y[k]).sum::<f64>();
            }
            r += v.eval(&pt, phi) + eps * s2;
        }
    }
    let (r, l, o) = (r * hn, l * hn, o * hn);
    let objective = r / l;
    let ratio = (o / l).sqrt();
    Ok(Revalidation {
        objective,
        field_norm: l.sqrt(),
        constraint_value: o.sqrt(),
        constraint_ratio: ratio,
        feasible: ratio <= gamma * (1.0 + 1e-9),
        matches: rel_close(objective, cert.objective, 1e-8) && rel_close(ratio, cert.constraint_ratio, 1e-8),
    })
}
