//! Cutting off the singular sequence near its concentration point: the commutator
//! norm and the mass histogram near the boundary.

use afreeqc::fields::DomainSpec;
use afreeqc::sequences::*;
use afreeqc::symbol::catalog;

fn main() -> afreeqc::error::Result<()> {
    let op = catalog("cauchy_riemann", None)?;
    let eta = Cutoff { center: vec![1.0, 0.0], r_in: 0.5, r_out: 1.0 };
    let seq = |k: u32| {
        let f = cr_singular_sequence(&DomainSpec::unit_disk(), k, 1e-10)?;
        f.sample(&f.default_grid(128)?)
    };
    let r = commutator_decay(&op, &seq, &eta, &[1, 2, 4, 8, 16, 32, 64])?;
    for row in &r.rows {
        println!("k={:<3} ||A(eta u_k)||_-1 = {:.4e}", row.k, row.negative_norm);
    }
    println!("rate {:.3}, decreasing {}", r.rate, r.decreasing);

    let cells = CellPartition { lo: vec![-1.125, -1.125], hi: vec![1.125, 1.125], per_axis: 4 };
    let f = cr_singular_sequence(&DomainSpec::unit_disk(), 16, 1e-10)?;
    let bm = cr_boundary_mass(&f, &f.default_grid(128)?, 2.0, &cells)?;
    println!("k=16 band fraction {:.4}", bm.band_fraction);
    // cells are indexed x-major; print with y increasing upward
    let p = cells.per_axis;
    for j in (0..p).rev() {
        println!("  {}", (0..p).map(|i| format!("{:.3}", bm.histogram[i * p + j] / bm.total)).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}
