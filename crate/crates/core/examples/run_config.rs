//! Drive a task from a JSON configuration, the same way `afreeqc run` does.

use afreeqc::experiment::{run, ExperimentConfig};

const CONFIG: &str = r#"{
  "task": "test-strong-aqcb",
  "operator": {"name": "cauchy_riemann"},
  "integrand": {"name": "neg_norm_pow"},
  "tester": {"eps": 0.5, "beta": 0.5, "normal": [1.0, 0.0]},
  "search": {"seed": 3, "grid": 32}
}"#;

fn main() -> afreeqc::error::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let out = run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&out.summary)?);
    println!("exit code {}", out.exit_code());
    Ok(())
}
