//! Interior tester: minimizes `J(phi) = int_Q v(s0 + phi)` over mean-zero
//! periodic `A`-free `phi`.

use rayon::prelude::*;

use super::descent::{descend, Objective, Workspace};
use super::{
    rel_close, CertParams, Certificate, Revalidation, SearchConfig, SearchResult, Status, Tester, TraceSummary,
    UNBOUNDED_BELOW,
};
use crate::error::{Error, Result};
use crate::fields::{apply_a_periodic, hminus1_norm_periodic, AnyField, GridSpec, PeriodicField};
use crate::integrand::Integrand;
use crate::projection::AfreeProjector;
use crate::symbol::ConstantRankOperator;

struct Setup<'a> {
    v: &'a dyn Integrand,
    proj: AfreeProjector,
    s0: &'a [f64],
    x: Vec<f64>,
    m: usize,
    hn: f64,
}

impl Objective for Setup<'_> {
    fn dim(&self) -> usize {
        self.proj.grid().len() * self.m
    }
    fn weight(&self) -> f64 {
        self.hn
    }
    fn eval(&self, phi: &[f64], _mu: f64, grad: Option<&mut [f64]>, _ws: &mut Workspace) -> Result<f64> {
        let m = self.m;
        let mut s = vec![0.0; m];
        let mut j = 0.0;
        match grad {
            Some(g) => {
                for (p, gi) in phi.chunks_exact(m).zip(g.chunks_exact_mut(m)) {
                    for c in 0..m {
                        s[c] = self.s0[c] + p[c];
                    }
                    j += self.v.eval(&self.x, &s);
                    self.v.grad(&self.x, &s, gi);
                }
            }
            None => {
                for p in phi.chunks_exact(m) {
                    for c in 0..m {
                        s[c] = self.s0[c] + p[c];
                    }
                    j += self.v.eval(&self.x, &s);
                }
            }
        }
        Ok(j * self.hn)
    }
    fn project(&self, x: &mut [f64]) {
        let t = self.proj.project_values(x);
        x.copy_from_slice(&t);
    }
    fn stop(&self, value: f64) -> bool {
        value < UNBOUNDED_BELOW
    }
}

/// Searches for `phi` with `int_Q v(s0 + phi) < v(s0)`.
///
/// The integrand is evaluated at `x = 0`. Iterates are re-projected onto the
/// range of `T` after every step, so `A phi = 0` holds in the multiplier sense.
pub fn test_aqc(op: &ConstantRankOperator, v: &dyn Integrand, s0: &[f64], cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let a = op.op();
    let (n, m) = (a.n(), a.m());
    if s0.len() != m || v.m().is_some_and(|k| k != m) {
        return Err(Error::DimensionMismatch(format!("s0 and the integrand must have {m} components")));
    }
    if s0.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("s0".into()));
    }
    let grid = GridSpec::unit_cube(n, cfg.grid)?;
    let x = vec![0.0; n];
    let reference = v.eval(&x, s0);
    let setup = Setup { v, proj: AfreeProjector::new(op, &grid)?, s0, x, m, hn: grid.cell_volume() };
    let max_freq = 4.min(cfg.grid / 2 - 1);
    let restarts = cfg.restarts.max(1);
    let outcomes: Vec<Result<(f64, Vec<f64>, usize, Vec<f64>)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = cfg.rng(r);
            let seed = PeriodicField::random_smooth(grid.clone(), m, max_freq, true, &mut rng)?;
            let mut ws = Workspace::default();
            let out = descend(&setup, seed.values(), 0.0, cfg.max_iter * cfg.penalty_stages, cfg.initial_step, &mut ws)?;
            Ok((out.value, out.x, out.iterations, out.history))
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.0 < outcomes[best].0 {
            best = r;
        }
    }
    let (value, phi, _, _) = &outcomes[best];
    let witness = PeriodicField::new(grid, m, phi.clone())?;
    let field_norm = (setup.hn * phi.iter().map(|t| t * t).sum::<f64>()).sqrt();
    let residual = hminus1_norm_periodic(&apply_a_periodic(a, &witness)?);
    let gap = value - reference;
    let cert = Certificate {
        tester: Tester::Aqc,
        operator: a.name().to_string(),
        integrand: v.name(),
        status: if gap < -cfg.margin { Status::Violation } else { Status::NoneFound },
        unbounded_below: *value < UNBOUNDED_BELOW,
        marginal: gap.abs() <= cfg.margin,
        infeasible: false,
        objective: *value,
        field_norm,
        constraint_value: residual,
        constraint_ratio: if field_norm > 0.0 { residual / field_norm } else { 0.0 },
        params: CertParams { s0: Some(s0.to_vec()), x0: vec![0.0; n], reference: Some(reference), ..Default::default() },
        trace: TraceSummary {
            iterations: outcomes.iter().map(|o| o.2).sum(),
            restarts,
            seed: cfg.seed,
            best_restart: Some(best),
            grid: cfg.grid,
            penalty_stages: cfg.penalty_stages,
        },
        witness_file: None,
    };
    let histories = outcomes.into_iter().map(|o| o.3).collect();
    Ok(SearchResult { certificate: cert, witness: Some(AnyField::Periodic(witness)), histories })
}

/// Recomputes `J` and the `A`-free residual of an interior-tester witness.
pub fn revalidate_aqc(
    cert: &Certificate,
    witness: &AnyField,
    op: &ConstantRankOperator,
    v: &dyn Integrand,
) -> Result<Revalidation> {
    let AnyField::Periodic(w) = witness else {
        return Err(Error::InvalidArgument("interior-tester witnesses are periodic fields".into()));
    };
    let s0 = cert.params.s0.as_deref().ok_or_else(|| Error::InvalidArgument("certificate lacks s0".into()))?;
    let m = w.m();
    if s0.len() != m {
        return Err(Error::DimensionMismatch("s0 does not match the witness".into()));
    }
    let hn = w.grid().cell_volume();
    let mut s = vec![0.0; m];
    let mut j = 0.0;
    for p in w.values().chunks_exact(m) {
        for c in 0..m {
            s[c] = s0[c] + p[c];
        }
        j += v.eval(&cert.params.x0, &s);
    }
    let objective = j * hn;
    let field_norm = (hn * w.values().iter().map(|t| t * t).sum::<f64>()).sqrt();
    let residual = hminus1_norm_periodic(&apply_a_periodic(op.op(), w)?);
    let ratio = if field_norm > 0.0 { residual / field_norm } else { 0.0 };
    Ok(Revalidation {
        objective,
        field_norm,
        constraint_value: residual,
        constraint_ratio: ratio,
        feasible: ratio <= 1e-8,
        matches: rel_close(objective, cert.objective, 1e-8) && rel_close(field_norm, cert.field_norm, 1e-8),
    })
}
