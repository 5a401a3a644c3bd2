//! Built-in and expression integrands: homogeneity checks, recession limits and a
//! determinant evaluated on a gradient field.

use afreeqc::fields::{GridSpec, PeriodicField};
use afreeqc::integrand::*;

fn main() -> afreeqc::error::Result<()> {
    for (name, m, n) in [("norm_pow", 2, 2), ("neg_norm_pow", 2, 2), ("det2", 4, 2), ("cofactor_normal", 9, 3)] {
        let h = HomogeneousIntegrand::from_spec(&IntegrandSpec::named(name), m, n)?;
        println!("{name:>16}: p = {}", h.p());
    }
    let expr = IntegrandSpec { expr: Some("s0*s1 - 2*s1*s1".into()), ..IntegrandSpec::named("expr") };
    let h = expr.build()?;
    let rec = recession_estimate(h.as_ref(), &[0.0, 0.0], &[1.0, 1.0], &[1.0, 10.0, 100.0, 1000.0])?;
    println!("recession of s0 s1 - 2 s1^2 at (1,1): {:.6} (converged {})", rec.estimate, rec.converged);
    let mixed = IntegrandSpec { expr: Some("s0*s0 + s1".into()), ..IntegrandSpec::named("expr") };
    println!("mixed degree: {}", HomogeneousIntegrand::from_spec(&mixed, 2, 2).unwrap_err());

    // F + grad psi with psi periodic: det integrates to det F
    let g = GridSpec::unit_cube(2, 64)?;
    let t = 2.0 * std::f64::consts::PI;
    let u = PeriodicField::from_fn(g, 4, |x, o| {
        let (a, b) = (t * x[0], t * x[1]);
        o.copy_from_slice(&[
            1.0 + t * a.cos() * b.sin(),
            0.5 + t * a.sin() * b.cos(),
            -0.2 - t * b.sin(),
            2.0 + 0.0 * a,
        ]);
    })?;
    let det = IntegrandSpec::named("det2").build()?;
    println!("int det(F + grad psi) = {:.12}, det F = {}", functional_eval(det.as_ref(), &u, None)?, 1.0 * 2.0 - 0.5 * -0.2);
    Ok(())
}
