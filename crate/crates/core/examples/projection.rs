//! Project a random periodic field onto divergence-free fields and report the residuals.

use afreeqc::fields::{GridSpec, PeriodicField};
use afreeqc::projection::{project_afree, projection_report};
use afreeqc::symbol::{catalog, ConstantRankOperator};
use rand::SeedableRng;

fn main() -> afreeqc::error::Result<()> {
    let op = ConstantRankOperator::verify(catalog("div", None)?)?;
    let grid = GridSpec::unit_cube(2, 64)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let u = PeriodicField::random_smooth(grid, 2, 6, true, &mut rng)?;
    let tu = project_afree(&op, &u)?;
    let r = projection_report(&op, &u)?;
    println!("|u| = {:.4}  |Tu| = {:.4}", r.norm_u, r.norm_tu);
    println!("|A Tu| = {:.2e}  |TTu - Tu| = {:.2e}", r.residual_afree, r.idempotence_gap);
    println!("mean of Tu = {:?}", tu.mean());
    Ok(())
}
