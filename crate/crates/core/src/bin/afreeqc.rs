use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use afreeqc::experiment::{
    exit_code, init_threads_from_env, run, DemoKind, DemoParams, ExperimentConfig, OperatorRef, Task, EXIT_ERROR,
};
use afreeqc::integrand::IntegrandSpec;

#[derive(Parser)]
#[command(name = "afreeqc", version, about = "A-free fields, negative norms and quasiconvexity testers")]
struct Cli {
    /// Print the experiment config as JSON instead of running it.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Built-in operators.
    Ops {
        #[command(subcommand)]
        what: OpsCommand,
    },
    /// Constant-rank check of the symbol.
    RankCheck {
        #[command(flatten)]
        op: OpArgs,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Projects a periodic AFK1 field onto the A-free fields.
    Project {
        #[command(flatten)]
        op: OpArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Interior quasiconvexity at s0.
    TestAqc(TestArgs),
    /// Boundary quasiconvexity, periodic form.
    TestAqcb(TestArgs),
    /// Strong boundary quasiconvexity on the half-ball.
    TestStrongAqcb(TestArgs),
    /// Strong and periodic boundary testers side by side.
    QcbGap(TestArgs),
    /// Sequence demos; writes CSV plus a JSON sidecar.
    Demo {
        #[arg(value_enum)]
        kind: DemoArg,
        #[arg(long, default_value_t = 64)]
        k_max: u32,
        #[arg(long)]
        grid: Option<usize>,
        /// Dilation center, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verdict matrix of both boundary testers on div, cauchy_riemann, curl2d.
    Table5 {
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Markdown output; a CSV is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a JSON experiment config.
    Run { config: PathBuf },
}

#[derive(Subcommand)]
enum OpsCommand {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoArg {
    Cr,
    Dilation,
    Hessian,
    Cofactor,
}

#[derive(Args)]
struct OpArgs {
    /// Catalog name, or a path to a JSON operator document.
    #[arg(long)]
    op: String,
    /// Space dimension for div.
    #[arg(long)]
    dim: Option<usize>,
}

impl OpArgs {
    fn to_ref(&self) -> OperatorRef {
        if self.op.ends_with(".json") {
            OperatorRef { name: "custom".into(), dim: None, file: Some(self.op.clone().into()) }
        } else {
            OperatorRef { name: self.op.clone(), dim: self.dim, file: None }
        }
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    op: OpArgs,
    /// Catalog integrand name.
    #[arg(long, default_value = "neg_norm_pow")]
    integrand: String,
    /// Expression for the `expr` integrand.
    #[arg(long)]
    expr: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    s0: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    normal: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    eps: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, default_value_t = 32)]
    grid: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn tester_config(task: Task, a: TestArgs) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(task);
    c.operator = Some(a.op.to_ref());
    let mut spec = IntegrandSpec::named(&a.integrand);
    spec.expr = a.expr;
    spec.p = a.p;
    c.integrand = Some(spec);
    c.tester.s0 = a.s0;
    c.tester.normal = a.normal;
    c.tester.eps = a.eps;
    c.tester.beta = a.beta;
    c.tester.gamma = a.gamma;
    c.search.grid = a.grid;
    c.search.restarts = a.restarts;
    c.search.seed = a.seed;
    if let Some(m) = a.max_iter {
        c.search.max_iter = m;
    }
    c.output.out = a.out;
    c
}

fn build(cmd: Command) -> afreeqc::Result<ExperimentConfig> {
    Ok(match cmd {
        Command::Ops { what: OpsCommand::List } => ExperimentConfig::new(Task::OpsList),
        Command::RankCheck { op, samples, out } => {
            let mut c = ExperimentConfig::new(Task::RankCheck);
            c.operator = Some(op.to_ref());
            c.tester.rank_samples = samples;
            c.output.out = out;
            c
        }
        Command::Project { op, input, out, report } => {
            let mut c = ExperimentConfig::new(Task::Project);
            c.operator = Some(op.to_ref());
            c.output.input = Some(input);
            c.output.out = Some(out);
            c.output.report = report;
            c
        }
        Command::TestAqc(a) => tester_config(Task::TestAqc, a),
        Command::TestAqcb(a) => tester_config(Task::TestAqcb, a),
        Command::TestStrongAqcb(a) => tester_config(Task::TestStrongAqcb, a),
        Command::QcbGap(a) => tester_config(Task::QcbGap, a),
        Command::Demo { kind, k_max, grid, x0, seed, out } => {
            let mut c = ExperimentConfig::new(Task::Demo);
            let kind = match kind {
                DemoArg::Cr => DemoKind::Cr,
                DemoArg::Dilation => DemoKind::Dilation,
                DemoArg::Hessian => DemoKind::Hessian,
                DemoArg::Cofactor => DemoKind::Cofactor,
            };
            c.demo = Some(DemoParams { kind, k_max, grid, x0 });
            c.search.seed = seed;
            c.output.out = out;
            c
        }
        Command::Table5 { grid, restarts, seed, out } => {
            let mut c = ExperimentConfig::new(Task::Table5);
            c.search.grid = grid;
            c.search.restarts = restarts;
            c.search.seed = seed;
            c.output.out = out;
            c
        }
        Command::Run { config } => ExperimentConfig::load(&config)?,
    })
}

fn main() -> ExitCode {
    // usage errors exit 1; 2 is reserved for violations
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    if let Err(e) = init_threads_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ERROR as u8);
    }
    let cfg = match build(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    if cli.dump_config {
        return match cfg.to_json() {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_ERROR as u8)
            }
        };
    }
    let result = run(&cfg);
    match &result {
        Ok(o) => {
            if cfg.task == Task::Table5 && cfg.output.out.is_none() {
                if let Ok(t) = serde_json::from_value::<afreeqc::experiment::Table5>(o.summary.clone()) {
                    print!("{}", t.to_markdown());
                }
            } else {
                println!("{}", serde_json::to_string_pretty(&o.summary).unwrap_or_default());
            }
            for a in &o.artifacts {
                eprintln!("wrote {}", a.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
