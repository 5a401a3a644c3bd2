//! Search-based testers for quasiconvexity in the interior, at the boundary
//! (periodic form), and in the strong boundary form on half-balls.

mod aqc;
mod descent;
mod periodic;
mod seeds;
mod strong;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use aqc::{revalidate_aqc, test_aqc};
pub use periodic::{revalidate_periodic, test_aqcb_periodic, test_aqcb_periodic_at};
pub use strong::{revalidate_strong, strong_grid, test_strong_aqcb, test_strong_aqcb_at};

use crate::error::{Error, Result};
use crate::fields::{write_afk1, AnyField};
use crate::integrand::HomogeneousIntegrand;
use crate::symbol::ConstantRankOperator;

/// Values below this are treated as an objective running off to minus infinity.
pub const UNBOUNDED_BELOW: f64 = -1e12;

/// Optimizer settings shared by all testers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Grid points per axis.
    pub grid: usize,
    /// Random restarts in addition to operator-specific seeds.
    pub restarts: usize,
    /// Descent iterations per penalty stage.
    pub max_iter: usize,
    /// Initial trial step of the backtracking line search.
    pub initial_step: f64,
    pub seed: u64,
    /// Violation margin.
    pub margin: f64,
    /// Number of penalty stages; the weight grows tenfold per stage.
    pub penalty_stages: usize,
    pub penalty_start: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid: 32,
            restarts: 4,
            max_iter: 60,
            initial_step: 0.5,
            seed: 0,
            margin: 1e-4,
            penalty_stages: 6,
            penalty_start: 1.0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 8 || !self.grid.is_power_of_two() {
            return Err(Error::InvalidArgument("grid must be a power of two >= 8".into()));
        }
        if self.max_iter == 0 || self.penalty_stages == 0 {
            return Err(Error::InvalidArgument("iteration counts must be positive".into()));
        }
        if !(self.initial_step > 0.0 && self.margin > 0.0 && self.penalty_start > 0.0) {
            return Err(Error::InvalidArgument("step, margin and penalty start must be positive".into()));
        }
        Ok(())
    }

    /// Independent stream for restart `r`.
    pub(crate) fn rng(&self, r: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(r as u64 + 1);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Violation,
    NoneFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tester {
    Aqc,
    StrongAqcb,
    AqcbPeriodic,
}

/// Parameters the search was run with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CertParams {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub normal: Option<Vec<f64>>,
    /// Point at which the integrand is evaluated.
    pub x0: Vec<f64>,
    /// Scale of the neighborhood around `x0`; zero means frozen.
    pub delta: f64,
    /// `v(s0)` for the interior test.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSummary {
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub best_restart: Option<usize>,
    pub grid: usize,
    pub penalty_stages: usize,
}

/// Outcome of a search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub tester: Tester,
    pub operator: String,
    pub integrand: String,
    pub status: Status,
    pub unbounded_below: bool,
    /// Best value within the margin of zero.
    pub marginal: bool,
    /// No restart reached the constraint set.
    pub infeasible: bool,
    /// Normalized objective of the best feasible point.
    pub objective: f64,
    /// `L^2` norm of the witness over the region the constraint refers to.
    pub field_norm: f64,
    /// Negative norm of `A phi` (strong), outer-mass norm (periodic), or the
    /// residual of the `A`-free constraint (interior).
    pub constraint_value: f64,
    pub constraint_ratio: f64,
    pub params: CertParams,
    pub trace: TraceSummary,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_file: Option<String>,
}

/// A certificate together with its witness and per-restart objective histories.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub certificate: Certificate,
    pub witness: Option<AnyField>,
    pub histories: Vec<Vec<f64>>,
}

impl SearchResult {
    pub fn is_violation(&self) -> bool {
        self.certificate.status == Status::Violation
    }

    /// Saves the witness as AFK1 and records the path in the certificate.
    pub fn write_witness(&mut self, path: &Path) -> Result<()> {
        if let Some(w) = &self.witness {
            write_afk1(path, w)?;
            self.certificate.witness_file = Some(path.display().to_string());
        }
        Ok(())
    }
}

/// Values recomputed from a stored witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Revalidation {
    pub objective: f64,
    pub field_norm: f64,
    pub constraint_value: f64,
    pub constraint_ratio: f64,
    pub feasible: bool,
    /// Recomputed values agree with the certificate to `1e-8` relative.
    pub matches: bool,
}

pub(crate) fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() < 1e-300
}

/// Re-evaluates a certificate on its witness.
pub fn revalidate(
    cert: &Certificate,
    witness: &AnyField,
    op: &ConstantRankOperator,
    v: &HomogeneousIntegrand,
) -> Result<Revalidation> {
    match cert.tester {
        Tester::StrongAqcb => revalidate_strong(cert, witness, op, v),
        Tester::AqcbPeriodic => revalidate_periodic(cert, witness, op, v),
        Tester::Aqc => revalidate_aqc(cert, witness, op, v.inner().as_ref()),
    }
}

/// Both boundary testers run with matched parameters.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub strong: SearchResult,
    pub periodic: SearchResult,
    pub agree: bool,
}

/// Runs the strong and the periodic boundary testers side by side.
pub fn qcb_gap_probe(
    op: &ConstantRankOperator,
    v: &HomogeneousIntegrand,
    normal: &[f64],
    eps: f64,
    beta: f64,
    gamma: f64,
    cfg: &SearchConfig,
) -> Result<GapReport> {
    let strong = test_strong_aqcb(op, v, normal, eps, beta, cfg)?;
    let periodic = test_aqcb_periodic(op, v, normal, eps, gamma, cfg)?;
    let agree = strong.certificate.status == periodic.certificate.status;
    Ok(GapReport { strong, periodic, agree })
}

/// Strong tester over a grid of constraint levels; each certificate records the grid.
pub fn beta_scan(
    op: &ConstantRankOperator,
    v: &HomogeneousIntegrand,
    normal: &[f64],
    eps: f64,
    betas: &[f64],
    cfg: &SearchConfig,
) -> Result<Vec<SearchResult>> {
    betas
        .iter()
        .map(|&b| {
            let mut r = test_strong_aqcb(op, v, normal, eps, b, cfg)?;
            r.certificate.params.beta_grid = Some(betas.to_vec());
            Ok(r)
        })
        .collect()
}

pub(crate) fn unit_normal(normal: &[f64], n: usize) -> Result<Vec<f64>> {
    if normal.len() != n {
        return Err(Error::DimensionMismatch(format!("normal has length {}, expected {n}", normal.len())));
    }
    let r = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("normal must be a nonzero finite vector".into()));
    }
    Ok(normal.iter().map(|v| v / r).collect())
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}
