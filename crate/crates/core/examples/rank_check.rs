//! Symbol rank of every catalog operator over sampled unit directions.

use afreeqc::symbol::{catalog, check_constant_rank, CATALOG, DEFAULT_RANK_SAMPLES, RANK_TOL};

fn main() -> afreeqc::error::Result<()> {
    for name in CATALOG {
        let op = catalog(name, None)?;
        let r = check_constant_rank(&op, DEFAULT_RANK_SAMPLES, RANK_TOL)?;
        println!("{name:>15}: n={} m={} rank={} constant={}", op.n(), op.m(), r.rank, r.constant_rank);
    }
    Ok(())
}
