//! Strong boundary tester on the half-ball `D = {|x| < 1, x . nu < 0}`.
//!
//! Minimizes `R/L + mu max(0, C^2/L - beta^2)` where, over fields supported
//! in `B(0, 1/2) ∩ D`, `R = int_D v(phi) + eps |phi|^2`, `L = ||phi||^2` and
//! `C = ||A phi||` in the negative norm over `D`.

use rayon::prelude::*;

use super::descent::{descend, Objective, Workspace};
use super::seeds::{seed_plan, seed_values};
use super::{
    check_positive, rel_close, unit_normal, CertParams, Certificate, Revalidation, SearchConfig, SearchResult, Status,
    Tester, TraceSummary,
};
use crate::error::{Error, Result};
use crate::fields::{AnyField, DomainField, DomainNorm, DomainSpec, GridSpec};
use crate::integrand::HomogeneousIntegrand;
use crate::symbol::ConstantRankOperator;

/// Half-width of the computational box around the half-ball.
const BOX_HALF_WIDTH: f64 = 1.25;
/// Radius of the support of admissible fields.
const SUPPORT_RADIUS: f64 = 0.5;

/// The box grid used by the strong tester at resolution `size`.
pub fn strong_grid(n: usize, size: usize) -> Result<GridSpec> {
    GridSpec::cube(n, size, -BOX_HALF_WIDTH, BOX_HALF_WIDTH)
}

struct Setup<'a> {
    v: &'a HomogeneousIntegrand,
    norm: DomainNorm,
    unknowns: Vec<usize>,
    eval_points: Vec<f64>,
    m: usize,
    n: usize,
    hn: f64,
    eps: f64,
    beta: f64,
    total_len: usize,
}

struct Parts {
    r: f64,
    l: f64,
    c2: f64,
}

impl Setup<'_> {
    fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.total_len];
        let m = self.m;
        for (j, &i) in self.unknowns.iter().enumerate() {
            full[i * m..(i + 1) * m].copy_from_slice(&x[j * m..(j + 1) * m]);
        }
        full
    }

    fn parts(&self, x: &[f64], grad: Option<(&mut [f64], f64)>, ws: &mut Workspace) -> Result<Parts> {
        let m = self.m;
        let mut r = 0.0;
        let mut l = 0.0;
        for (j, phi) in x.chunks_exact(m).enumerate() {
            let pt = &self.eval_points[j * self.n..(j + 1) * self.n];
            let s2: f64 = phi.iter().map(|t| t * t).sum();
            r += self.v.eval(pt, phi) + self.eps * s2;
            l += s2;
        }
        r *= self.hn;
        l *= self.hn;
        let full = self.scatter(x);
        let (c2, gc, psi) = self.norm.norm_sq_with_grad(&full, ws.psi.as_deref())?;
        ws.psi = Some(psi);
        if let Some((g, mu)) = grad {
            let q = r / l;
            let active = c2 / l > self.beta * self.beta;
            let mut dv = vec![0.0; m];
            for (j, phi) in x.chunks_exact(m).enumerate() {
                let pt = &self.eval_points[j * self.n..(j + 1) * self.n];
                self.v.grad(pt, phi, &mut dv);
                let node = self.unknowns[j];
                for c in 0..m {
                    let dl = 2.0 * phi[c];
                    let dr = dv[c] + 2.0 * self.eps * phi[c];
                    let mut gi = (dr - q * dl) / l;
                    if active {
                        let dc = gc[node * m + c] / self.hn;
                        gi += mu * (dc - c2 / l * dl) / l;
                    }
                    g[j * m + c] = gi;
                }
            }
        }
        Ok(Parts { r, l, c2 })
    }
}

impl Objective for Setup<'_> {
    fn dim(&self) -> usize {
        self.unknowns.len() * self.m
    }
    fn weight(&self) -> f64 {
        self.hn
    }
    fn eval(&self, x: &[f64], mu: f64, grad: Option<&mut [f64]>, ws: &mut Workspace) -> Result<f64> {
        let p = self.parts(x, grad.map(|g| (g, mu)), ws)?;
        Ok(p.r / p.l + mu * (p.c2 / p.l - self.beta * self.beta).max(0.0))
    }
    fn normalize(&self, x: &mut [f64]) -> bool {
        let l = self.hn * x.iter().map(|t| t * t).sum::<f64>();
        if !(l > 0.0 && l.is_finite()) {
            return false;
        }
        let s = 1.0 / l.sqrt();
        x.iter_mut().for_each(|t| *t *= s);
        true
    }
}

struct RestartOutcome {
    best: Option<(f64, Vec<f64>, f64)>,
    /// Smallest constraint ratio reached, feasible or not.
    min_ratio: f64,
    iterations: usize,
    history: Vec<f64>,
}

/// Strong tester with the integrand frozen at the origin.
pub fn test_strong_aqcb(
    op: &ConstantRankOperator,
    v: &HomogeneousIntegrand,
    normal: &[f64],
    eps: f64,
    beta: f64,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    let n = op.op().n();
    test_strong_aqcb_at(op, v, normal, eps, beta, &vec![0.0; n], 0.0, cfg)
}

/// Strong tester evaluating the integrand at `x0 + delta * y` for `y` in the
/// half-ball; `delta = 0` freezes it at `x0`.
#[allow(clippy::too_many_arguments)]
pub fn test_strong_aqcb_at(
    op: &ConstantRankOperator,
    v: &HomogeneousIntegrand,
    normal: &[f64],
    eps: f64,
    beta: f64,
    x0: &[f64],
    delta: f64,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    cfg.validate()?;
    check_positive("eps", eps)?;
    check_positive("beta", beta)?;
    let a = op.op();
    let (n, m) = (a.n(), a.m());
    if v.m() != m {
        return Err(Error::DimensionMismatch("integrand and operator components differ".into()));
    }
    if (v.p() - 2.0).abs() > 1e-12 {
        return Err(Error::Precondition("negative norms are only computed for p = 2".into()));
    }
    if x0.len() != n || !(delta >= 0.0) {
        return Err(Error::InvalidArgument("x0 must have length n and delta must be >= 0".into()));
    }
    let nu = unit_normal(normal, n)?;
    let grid = strong_grid(n, cfg.grid)?;
    let domain = DomainSpec::HalfBall { center: vec![0.0; n], radius: 1.0, normal: nu.clone() };
    let dmask = domain.mask(&grid);
    let mut unknowns = Vec::new();
    let mut points = Vec::new();
    let mut x = vec![0.0; n];
    for (i, &inside) in dmask.iter().enumerate() {
        grid.node_into(i, &mut x);
        if inside && x.iter().map(|t| t * t).sum::<f64>() < SUPPORT_RADIUS * SUPPORT_RADIUS {
            unknowns.push(i);
            points.extend_from_slice(&x);
        }
    }
    if unknowns.is_empty() {
        return Err(Error::Resolution("no grid nodes in the support region".into()));
    }
    let eval_points: Vec<f64> = points.chunks_exact(n).flat_map(|y| y.iter().zip(x0).map(|(t, c)| c + delta * t)).collect();
    let setup = Setup {
        v,
        norm: DomainNorm::new(a, &grid, &dmask)?,
        unknowns,
        eval_points,
        m,
        n,
        hn: grid.cell_volume(),
        eps,
        beta,
        total_len: grid.len() * m,
    };
    let plan = seed_plan(a.name(), n, grid.h(0), cfg.restarts, false);
    let outcomes: Vec<Result<RestartOutcome>> = plan
        .par_iter()
        .enumerate()
        .map(|(r, &kind)| {
            let mut rng = cfg.rng(r);
            let x0 = seed_values(kind, &points, n, m, &nu, None, false, &mut rng);
            run_restart(&setup, x0, cfg)
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut best: Option<(usize, f64)> = None;
    for (r, o) in outcomes.iter().enumerate() {
        if let Some((val, _, _)) = &o.best {
            if best.is_none_or(|(_, b)| *val < b) {
                best = Some((r, *val));
            }
        }
    }
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let params = CertParams {
        eps: Some(eps),
        beta: Some(beta),
        normal: Some(nu.clone()),
        x0: x0.to_vec(),
        delta,
        ..Default::default()
    };
    let trace = TraceSummary {
        iterations,
        restarts: plan.len(),
        seed: cfg.seed,
        best_restart: best.map(|b| b.0),
        grid: cfg.grid,
        penalty_stages: cfg.penalty_stages,
    };
    let histories = outcomes.iter().map(|o| o.history.clone()).collect();
    let mk = |status, objective, field_norm, constraint_value, marginal, infeasible| Certificate {
        tester: Tester::StrongAqcb,
        operator: a.name().to_string(),
        integrand: v.name(),
        status,
        unbounded_below: false,
        marginal,
        infeasible,
        objective,
        field_norm,
        constraint_value,
        constraint_ratio: if field_norm > 0.0 { constraint_value / field_norm } else { 0.0 },
        params: params.clone(),
        trace: trace.clone(),
        witness_file: None,
    };
    let Some((r, val)) = best else {
        // infeasible: report the smallest ratio the search reached
        let mut cert = mk(Status::NoneFound, 0.0, 0.0, 0.0, false, true);
        cert.constraint_ratio = outcomes.iter().map(|o| o.min_ratio).fold(f64::INFINITY, f64::min);
        return Ok(SearchResult { certificate: cert, witness: None, histories });
    };
    let (_, xbest, _) = outcomes[r].best.clone().expect("best restart has a point");
    let full = setup.scatter(&xbest);
    let witness = DomainField::new(grid.clone(), m, dmask, full, domain)?;
    let mut ws = Workspace::default();
    let parts = setup.parts(&xbest, None, &mut ws)?;
    let status = if val < -cfg.margin { Status::Violation } else { Status::NoneFound };
    let marginal = val.abs() <= cfg.margin;
    let cert = mk(status, parts.r / parts.l, parts.l.sqrt(), parts.c2.sqrt(), marginal, false);
    Ok(SearchResult { certificate: cert, witness: Some(AnyField::Domain(witness)), histories })
}

fn run_restart(setup: &Setup, x0: Vec<f64>, cfg: &SearchConfig) -> Result<RestartOutcome> {
    let mut ws = Workspace::default();
    let mut x = x0;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut min_ratio = f64::INFINITY;
    let mut iterations = 0;
    let mut history = Vec::new();
    let beta2 = setup.beta * setup.beta;
    let mut consider = |x: &[f64], ws: &mut Workspace, best: &mut Option<(f64, Vec<f64>, f64)>| -> Result<bool> {
        let p = setup.parts(x, None, ws)?;
        let q = p.r / p.l;
        let ratio2 = p.c2 / p.l;
        min_ratio = min_ratio.min(ratio2.sqrt());
        if ratio2 <= beta2 && best.as_ref().is_none_or(|b| q < b.0) {
            *best = Some((q, x.to_vec(), ratio2.sqrt()));
        }
        Ok(best.as_ref().is_some_and(|b| b.0 < -cfg.margin))
    };
    if !setup.normalize(&mut x) {
        return Ok(RestartOutcome { best, min_ratio, iterations, history });
    }
    if consider(&x, &mut ws, &mut best)? {
        return Ok(RestartOutcome { best, min_ratio, iterations, history });
    }
    let mut mu = cfg.penalty_start;
    for _ in 0..cfg.penalty_stages {
        let out = descend(setup, &x, mu, cfg.max_iter, cfg.initial_step, &mut ws)?;
        iterations += out.iterations;
        history.extend(out.history);
        x = out.x;
        if consider(&x, &mut ws, &mut best)? {
            break;
        }
        mu *= 10.0;
    }
    Ok(RestartOutcome { best, min_ratio, iterations, history })
}

/// Recomputes objective and constraint of a strong-tester witness.
pub fn revalidate_strong(
    cert: &Certificate,
    witness: &AnyField,
    op: &ConstantRankOperator,
    v: &HomogeneousIntegrand,
) -> Result<Revalidation> {
    let AnyField::Domain(w) = witness else {
        return Err(Error::InvalidArgument("strong-tester witnesses are domain fields".into()));
    };
    let n = w.grid().n();
    let m = w.m();
    let beta = cert.params.beta.ok_or_else(|| Error::InvalidArgument("certificate lacks beta".into()))?;
    let eps = cert.params.eps.ok_or_else(|| Error::InvalidArgument("certificate lacks eps".into()))?;
    let hn = w.grid().cell_volume();
    let mut r = 0.0;
    let mut l = 0.0;
    let mut y = vec![0.0; n];
    let mut pt = vec![0.0; n];
    for (i, phi) in w.values().chunks_exact(m).enumerate() {
        if !w.mask()[i] {
            continue;
        }
        w.grid().node_into(i, &mut y);
        for a in 0..n {
            pt[a] = cert.params.x0[a] + cert.params.delta * y[a];
        }
        let s2: f64 = phi.iter().map(|t| t * t).sum();
        r += v.eval(&pt, phi) + eps * s2;
        l += s2;
    }
    r *= hn;
    l *= hn;
    let c = DomainNorm::new(op.op(), w.grid(), w.mask())?.norm_of(w.values())?;
    let objective = r / l;
    let field_norm = l.sqrt();
    let ratio = c / field_norm;
    // scale-free comparison: the witness may have been rescaled
    let matches = rel_close(objective, cert.objective, 1e-8) && rel_close(ratio, cert.constraint_ratio, 1e-8);
    Ok(Revalidation {
        objective,
        field_norm,
        constraint_value: c,
        constraint_ratio: ratio,
        feasible: ratio <= beta * (1.0 + 1e-9),
        matches,
    })
}
