//! A compactly supported function whose Hessian determinant has negative integral over a half disk.

use afreeqc::sequences::{bump_search, hessian_demo};

fn main() -> afreeqc::error::Result<()> {
    let (u, value) = bump_search(7, 200, -0.01).expect("no negative bump in 200 trials");
    println!("half-disk integral of det D^2 u: {value:.6}");
    let (rep, _) = hessian_demo(&u, &[1, 2, 4, 8], 256)?;
    for (k, i) in rep.ks.iter().zip(&rep.integrals) {
        println!("  k={k}: {i:.9}");
    }
    println!("spread {:.2e}, mirrored bump gives {:.6}", rep.spread, u.reflected().half_integral());
    Ok(())
}
