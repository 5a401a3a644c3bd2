//! Dilations of a fixed divergence-free bump at an interior and at a boundary point.

use afreeqc::sequences::dilation_demo;

fn main() -> afreeqc::error::Result<()> {
    for x0 in [[0.5, -0.2], [1.0, 0.0]] {
        println!("x0 = {x0:?}");
        let report = dilation_demo(&[2, 4, 8, 16, 32, 64], 128, &x0, 0.05)?;
        for r in &report.rows {
            println!("  k={:<3} |u|_2 = {:.6}  I = {:+.6}  band = {:.4}", r.k, r.lp_norm, r.integrals[0], r.boundary_fraction.unwrap_or(0.0));
        }
    }
    Ok(())
}
