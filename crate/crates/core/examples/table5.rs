//! The operator-by-tester verdict table, as markdown.

use afreeqc::experiment::{table5, TesterParams};
use afreeqc::qctest::SearchConfig;

fn main() -> afreeqc::error::Result<()> {
    let t = table5(&TesterParams::default(), &SearchConfig::default())?;
    print!("{}", t.to_markdown());
    println!("matches expected: {}", t.matches_expected);
    Ok(())
}
