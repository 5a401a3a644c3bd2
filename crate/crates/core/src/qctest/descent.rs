//! Gradient descent with Armijo backtracking, shared by the testers.

use crate::error::Result;

/// Per-restart scratch carried between objective evaluations (warm starts).
#[derive(Debug, Default, Clone)]
pub(crate) struct Workspace {
    pub psi: Option<Vec<f64>>,
}

pub(crate) trait Objective: Sync {
    fn dim(&self) -> usize;
    /// Weight of the inner product in which gradients are expressed.
    fn weight(&self) -> f64;
    /// Value at penalty weight `mu`; writes the gradient when requested.
    fn eval(&self, x: &[f64], mu: f64, grad: Option<&mut [f64]>, ws: &mut Workspace) -> Result<f64>;
    /// Maps onto the admissible linear space (identity by default).
    fn project(&self, _x: &mut [f64]) {}
    /// Rescales to unit norm; returns `false` for the zero vector.
    fn normalize(&self, _x: &mut [f64]) -> bool {
        true
    }
    /// Stops the descent early, e.g. when the objective runs off to minus infinity.
    fn stop(&self, _value: f64) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub(crate) struct DescentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Minimizes `obj` at fixed `mu`, starting from `x0`.
pub(crate) fn descend(
    obj: &dyn Objective,
    x0: &[f64],
    mu: f64,
    max_iter: usize,
    initial_step: f64,
    ws: &mut Workspace,
) -> Result<DescentOutcome> {
    let n = obj.dim();
    let mut x = x0.to_vec();
    obj.project(&mut x);
    if !obj.normalize(&mut x) {
        let value = obj.eval(&x, mu, None, ws)?;
        return Ok(DescentOutcome { x, value, iterations: 0, history: vec![value] });
    }
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&x, mu, Some(&mut g), ws)?;
    obj.project(&mut g);
    let mut history = vec![f];
    let mut t = initial_step;
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    let mut iterations = 0;
    for _ in 0..max_iter {
        if obj.stop(f) {
            break;
        }
        let g2 = obj.weight() * g.iter().map(|v| v * v).sum::<f64>();
        if !(g2 > 1e-24 * (1.0 + f.abs())) {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..n {
                xn[i] = x[i] - t * g[i];
            }
            obj.project(&mut xn);
            if !obj.normalize(&mut xn) {
                t *= 0.5;
                continue;
            }
            let fnew = obj.eval(&xn, mu, Some(&mut gn), ws)?;
            if fnew.is_finite() && fnew <= f - 1e-4 * t * g2 {
                obj.project(&mut gn);
                let decrease = f - fnew;
                std::mem::swap(&mut x, &mut xn);
                std::mem::swap(&mut g, &mut gn);
                f = fnew;
                accepted = true;
                t *= 2.0;
                iterations += 1;
                history.push(f);
                if decrease <= 1e-13 * (1.0 + f.abs()) {
                    return Ok(DescentOutcome { x, value: f, iterations, history });
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(DescentOutcome { x, value: f, iterations, history })
}
