//! Negative Sobolev norms of A u: periodic, on the unit disk, and on a smaller disk.

use afreeqc::fields::*;
use afreeqc::symbol::catalog;

fn main() -> afreeqc::error::Result<()> {
    let op = catalog("div", None)?;
    let f = |x: &[f64], o: &mut [f64]| {
        o[0] = (3.0 * x[0]).sin() * x[1];
        o[1] = (2.0 * x[1]).cos() + x[0] * x[0];
    };
    let pu = PeriodicField::from_fn(GridSpec::unit_cube(2, 64)?, 2, |x, o| {
        let t = 2.0 * std::f64::consts::PI;
        o[0] = (t * x[0]).sin() * (t * x[1]).cos();
        o[1] = (t * x[1]).sin();
    })?;
    println!("periodic  ||A u||_-1 = {:.6}", hminus1_norm_periodic(&apply_a_periodic(&op, &pu)?));
    for r in [1.0, 0.5] {
        let dom = DomainSpec::Ball { center: vec![0.0, 0.0], radius: r };
        for n in [32, 64, 128] {
            let u = DomainField::from_fn(dom.clone(), dom.grid(n, 0.125)?, 2, f)?;
            println!("disk r={r} N={n:<4} ||A u||_-1 = {:.6}  ||u||_2 = {:.6}", hminus1_norm_domain(&op, &u)?, lp_norm(&u, 2.0)?);
        }
    }
    Ok(())
}
