//! Normalized holomorphic fields with a pole approaching the unit circle.

use afreeqc::sequences::cr_demo;

fn main() -> afreeqc::error::Result<()> {
    let ks = [1, 2, 4, 8, 16, 32, 64];
    let (fields, report) = cr_demo(&ks, 256, 1e-10, None)?;
    println!("{:>4} {:>12} {:>10} {:>10} {:>10}", "k", "ln dist", "|u|^2", "I(u)", "band");
    for (f, r) in fields.iter().zip(&report.rows) {
        println!(
            "{:>4} {:>12.4} {:>10.6} {:>10.6} {:>10.4}",
            r.k,
            f.ln_dist,
            r.lp_norm * r.lp_norm,
            r.integrals[0],
            r.boundary_fraction.unwrap_or(f64::NAN)
        );
    }
    let first = &report.rows[0].pairings;
    let last = &report.rows[ks.len() - 1].pairings;
    for (a, b) in first.iter().zip(last) {
        println!("pairing {a:+.3e} -> {b:+.3e}");
    }
    Ok(())
}
