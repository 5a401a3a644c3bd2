//! Experiment configuration, dispatch and report emission for the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::{read_afk1, write_afk1, write_atomic, AnyField};
use crate::integrand::{HomogeneousIntegrand, IntegrandSpec};
use crate::projection::projection_report;
use crate::qctest::{
    qcb_gap_probe, test_aqc, test_aqcb_periodic, test_strong_aqcb, SearchConfig, SearchResult, Status,
};
use crate::sequences::{bump_search, cofactor_demo, cr_demo, dilation_demo, hessian_demo, CofactorDemo, HessianBump, SequenceReport};
use crate::symbol::{catalog, check_constant_rank, ConstantRankOperator, OperatorA, CATALOG, DEFAULT_RANK_SAMPLES, RANK_TOL};

/// Exit status for a completed run without violations.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// A tester found a violation.
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    OpsList,
    RankCheck,
    Project,
    TestAqc,
    TestAqcb,
    TestStrongAqcb,
    QcbGap,
    Demo,
    Table5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoKind {
    Cr,
    Dilation,
    Hessian,
    Cofactor,
}

/// A catalog operator, or a JSON operator document when `file` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl OperatorRef {
    pub fn named(name: &str) -> Self {
        Self { name: name.into(), dim: None, file: None }
    }

    pub fn build(&self) -> Result<OperatorA> {
        match &self.file {
            Some(path) => OperatorA::from_json(&std::fs::read_to_string(path)?),
            None => catalog(&self.name, self.dim),
        }
    }
}

/// Tester parameters; unused entries are ignored by tasks that do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TesterParams {
    pub eps: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
    pub rank_samples: usize,
}

impl Default for TesterParams {
    fn default() -> Self {
        Self { eps: 0.5, beta: 0.5, gamma: 0.1, s0: None, normal: None, rank_samples: DEFAULT_RANK_SAMPLES }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoParams {
    pub kind: DemoKind,
    pub k_max: u32,
    /// Grid points per axis; quadrature nodes per panel for the cofactor demo.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Dilation center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

impl DemoParams {
    /// `1, 2, 4, ...` up to `k_max`.
    pub fn ks(&self) -> Vec<u32> {
        std::iter::successors(Some(1u32), |k| k.checked_mul(2)).take_while(|&k| k <= self.k_max).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

/// Everything a run needs. The random seed is `search.seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrand: Option<IntegrandSpec>,
    #[serde(default)]
    pub tester: TesterParams,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demo: Option<DemoParams>,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            operator: None,
            integrand: None,
            tester: TesterParams::default(),
            search: SearchConfig::default(),
            demo: None,
            output: OutputPaths::default(),
        }
    }

    /// Parses a JSON config; errors carry the line, column and offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
            Error::Parse(format!("config line {} column {}: {msg}", e.line(), e.column()))
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn operator(&self) -> Result<OperatorA> {
        self.operator
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("this task needs an operator".into()))?
            .build()
    }

    fn verified_operator(&self) -> Result<ConstantRankOperator> {
        ConstantRankOperator::verify(self.operator()?)
    }

    fn integrand_spec(&self) -> IntegrandSpec {
        self.integrand.clone().unwrap_or_else(|| IntegrandSpec::named("neg_norm_pow"))
    }

    fn normal(&self, n: usize) -> Vec<f64> {
        self.tester.normal.clone().unwrap_or_else(|| {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        })
    }
}

/// Result of [`run`]: a JSON summary printed by the binary plus the files written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub violation: bool,
    pub summary: Value,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.violation {
            EXIT_VIOLATION
        } else {
            EXIT_OK
        }
    }
}

pub fn exit_code(r: &Result<RunOutcome>) -> i32 {
    r.as_ref().map_or(EXIT_ERROR, RunOutcome::exit_code)
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    write_atomic(path, (serde_json::to_string_pretty(v)? + "\n").as_bytes())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Dispatches one configured task.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.search.validate()?;
    let out = cfg.output.out.as_deref();
    let mut artifacts = Vec::new();
    let mut violation = false;
    let summary = match cfg.task {
        Task::OpsList => {
            let ops = CATALOG
                .iter()
                .map(|name| {
                    let op = catalog(name, None)?;
                    let r = check_constant_rank(&op, cfg.tester.rank_samples, RANK_TOL)?;
                    Ok(json!({ "name": name, "n": op.n(), "m": op.m(), "d": op.d(), "rank": r.rank }))
                })
                .collect::<Result<Vec<_>>>()?;
            json!({ "operators": ops })
        }
        Task::RankCheck => {
            let r = check_constant_rank(&cfg.operator()?, cfg.tester.rank_samples, RANK_TOL)?;
            if let Some(p) = out {
                write_json(p, &r)?;
                artifacts.push(p.to_path_buf());
            }
            serde_json::to_value(&r)?
        }
        Task::Project => {
            let op = cfg.verified_operator()?;
            let input = cfg.output.input.as_deref().ok_or_else(|| Error::InvalidArgument("project needs an input field".into()))?;
            let u = match read_afk1(input)? {
                AnyField::Periodic(u) => u,
                AnyField::Domain(_) => return Err(Error::InvalidArgument("project needs a periodic (unmasked) field".into())),
            };
            let tu = crate::projection::project_afree(&op, &u)?;
            let report = projection_report(&op, &u)?;
            if let Some(p) = out {
                write_afk1(p, &AnyField::Periodic(tu))?;
                artifacts.push(p.to_path_buf());
            }
            if let Some(p) = cfg.output.report.as_deref() {
                write_json(p, &report)?;
                artifacts.push(p.to_path_buf());
            }
            serde_json::to_value(&report)?
        }
        Task::TestAqc => {
            let op = cfg.verified_operator()?;
            let v = cfg.integrand_spec().build()?;
            let s0 = cfg.tester.s0.clone().unwrap_or_else(|| vec![0.0; op.op().m()]);
            let r = test_aqc(&op, v.as_ref(), &s0, &cfg.search)?;
            violation = r.is_violation();
            emit_certificate(r, out, &mut artifacts)?
        }
        Task::TestAqcb | Task::TestStrongAqcb => {
            let op = cfg.verified_operator()?;
            let v = HomogeneousIntegrand::from_spec(&cfg.integrand_spec(), op.op().m(), op.op().n())?;
            let normal = cfg.normal(op.op().n());
            let t = &cfg.tester;
            let r = if cfg.task == Task::TestAqcb {
                test_aqcb_periodic(&op, &v, &normal, t.eps, t.gamma, &cfg.search)?
            } else {
                test_strong_aqcb(&op, &v, &normal, t.eps, t.beta, &cfg.search)?
            };
            violation = r.is_violation();
            emit_certificate(r, out, &mut artifacts)?
        }
        Task::QcbGap => {
            let op = cfg.verified_operator()?;
            let v = HomogeneousIntegrand::from_spec(&cfg.integrand_spec(), op.op().m(), op.op().n())?;
            let t = &cfg.tester;
            let mut g = qcb_gap_probe(&op, &v, &cfg.normal(op.op().n()), t.eps, t.beta, t.gamma, &cfg.search)?;
            violation = g.strong.is_violation() || g.periodic.is_violation();
            if let Some(p) = out {
                if g.strong.is_violation() {
                    g.strong.write_witness(&sibling(p, ".strong.afk"))?;
                }
                if g.periodic.is_violation() {
                    g.periodic.write_witness(&sibling(p, ".periodic.afk"))?;
                }
                artifacts.extend(
                    [&g.strong, &g.periodic].iter().filter_map(|r| r.certificate.witness_file.as_ref().map(PathBuf::from)),
                );
            }
            let v = json!({ "strong": g.strong.certificate, "periodic": g.periodic.certificate, "agree": g.agree });
            if let Some(p) = out {
                write_json(p, &v)?;
                artifacts.push(p.to_path_buf());
            }
            v
        }
        Task::Demo => {
            let d = cfg.demo.as_ref().ok_or_else(|| Error::InvalidArgument("demo task needs demo parameters".into()))?;
            let report = run_demo(d, cfg.search.seed)?;
            if let Some(p) = out {
                report.write(p)?;
                artifacts.push(p.to_path_buf());
                artifacts.push(sibling(p, ".json"));
            }
            json!({
                "generator": report.meta.generator,
                "min_integrals": (0..report.meta.integrands.len()).map(|i| report.min_integral(i)).collect::<Vec<_>>(),
                "rows": report.rows,
            })
        }
        Task::Table5 => {
            let t = table5(&cfg.tester, &cfg.search)?;
            if let Some(p) = out {
                write_atomic(p, t.to_markdown().as_bytes())?;
                let csv = p.with_extension("csv");
                write_atomic(&csv, &t.to_csv()?)?;
                artifacts.push(p.to_path_buf());
                artifacts.push(csv);
            }
            serde_json::to_value(&t)?
        }
    };
    Ok(RunOutcome { violation, summary, artifacts })
}

fn emit_certificate(mut r: SearchResult, out: Option<&Path>, artifacts: &mut Vec<PathBuf>) -> Result<Value> {
    if let Some(p) = out {
        if r.is_violation() {
            let w = sibling(p, ".witness.afk");
            r.write_witness(&w)?;
            artifacts.push(w);
        }
        write_json(p, &r.certificate)?;
        artifacts.push(p.to_path_buf());
    }
    Ok(serde_json::to_value(&r.certificate)?)
}

fn run_demo(d: &DemoParams, seed: u64) -> Result<SequenceReport> {
    let ks = d.ks();
    if ks.is_empty() {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    match d.kind {
        DemoKind::Cr => {
            let op = catalog("cauchy_riemann", None)?;
            Ok(cr_demo(&ks, d.grid.unwrap_or(512), 1e-10, Some(&op))?.1)
        }
        DemoKind::Dilation => {
            let x0 = d.x0.clone().unwrap_or_else(|| vec![1.0, 0.0]);
            dilation_demo(&ks, d.grid.unwrap_or(256), &x0, 0.05)
        }
        DemoKind::Hessian => {
            let u = bump_search(seed, 200, -0.01).map_or_else(HessianBump::default, |(u, _)| u);
            Ok(hessian_demo(&u, &ks, d.grid.unwrap_or(256))?.1)
        }
        DemoKind::Cofactor => {
            let mut c = CofactorDemo::default();
            if let Some(n) = d.grid {
                c.nodes = n;
            }
            cofactor_demo(&c, &ks)
        }
    }
}

/// One operator's verdicts under both boundary testers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table5Row {
    pub operator: String,
    pub strong: Status,
    pub periodic: Status,
    pub expected: (Status, Status),
    pub strong_objective: f64,
    pub periodic_objective: f64,
    pub strong_ratio: f64,
    pub periodic_infeasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table5 {
    pub integrand: String,
    pub params: TesterParams,
    pub search: SearchConfig,
    pub rows: Vec<Table5Row>,
    pub matches_expected: bool,
}

/// Verdicts of both boundary testers for `v = -|s|^2` on div, cauchy_riemann and curl2d.
pub fn table5(params: &TesterParams, search: &SearchConfig) -> Result<Table5> {
    use Status::{NoneFound, Violation};
    let cases = [("div", (Violation, Violation)), ("cauchy_riemann", (Violation, NoneFound)), ("curl2d", (Violation, Violation))];
    let spec = IntegrandSpec::named("neg_norm_pow");
    let mut rows = Vec::new();
    for (name, expected) in cases {
        let op = ConstantRankOperator::verify(catalog(name, None)?)?;
        let v = HomogeneousIntegrand::from_spec(&spec, op.op().m(), op.op().n())?;
        let normal = params.normal.clone().unwrap_or_else(|| vec![1.0, 0.0]);
        let g = qcb_gap_probe(&op, &v, &normal, params.eps, params.beta, params.gamma, search)?;
        let (s, p) = (&g.strong.certificate, &g.periodic.certificate);
        rows.push(Table5Row {
            operator: name.into(),
            strong: s.status,
            periodic: p.status,
            expected,
            strong_objective: s.objective,
            periodic_objective: p.objective,
            strong_ratio: s.constraint_ratio,
            periodic_infeasible: p.infeasible,
        });
    }
    let matches_expected = rows.iter().all(|r| (r.strong, r.periodic) == r.expected);
    Ok(Table5 { integrand: spec.name, params: params.clone(), search: search.clone(), rows, matches_expected })
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Violation => "violation",
        Status::NoneFound => "none_found",
    }
}

impl Table5 {
    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "v = -|s|^2, eps = {}, beta = {}, gamma = {}, grid = {}, restarts = {}, seed = {}\n\n",
            self.params.eps, self.params.beta, self.params.gamma, self.search.grid, self.search.restarts, self.search.seed
        );
        s.push_str("| operator | strong A-qcb | A-qcb (periodic) | expected |\n|---|---|---|---|\n");
        for r in &self.rows {
            s.push_str(&format!(
                "| {} | {} | {} | ({}, {}) |\n",
                r.operator,
                status_word(r.strong),
                status_word(r.periodic),
                status_word(r.expected.0),
                status_word(r.expected.1)
            ));
        }
        s
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["operator", "strong", "periodic", "strong_objective", "periodic_objective", "strong_ratio", "periodic_infeasible"])
            .map_err(fmt)?;
        for r in &self.rows {
            w.write_record([
                r.operator.clone(),
                status_word(r.strong).into(),
                status_word(r.periodic).into(),
                r.strong_objective.to_string(),
                r.periodic_objective.to_string(),
                r.strong_ratio.to_string(),
                r.periodic_infeasible.to_string(),
            ])
            .map_err(fmt)?;
        }
        w.into_inner().map_err(|e| Error::Format(e.to_string()))
    }
}

/// Caps the global thread pool at `AFREEQC_THREADS` when set.
pub fn init_threads_from_env() -> Result<Option<usize>> {
    let Ok(v) = std::env::var("AFREEQC_THREADS") else {
        return Ok(None);
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("AFREEQC_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(Some(n))
}
