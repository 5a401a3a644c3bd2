//! The cofactor-normal functional in three dimensions along several gradient sequences.

use afreeqc::sequences::{cofactor_demo, CofactorDemo, CofactorSequence};

fn main() -> afreeqc::error::Result<()> {
    let ks = [1, 4, 16, 64];
    for sequence in [CofactorSequence::Constant, CofactorSequence::Bump, CofactorSequence::Oscillating { direction: [1.0, 1.0, 1.0] }] {
        let cfg = CofactorDemo { sequence, ..CofactorDemo::default() };
        let r = cofactor_demo(&cfg, &ks)?;
        println!("{:?}", cfg.sequence);
        for row in &r.rows {
            println!("  k={:<3} I = {:+.8}  |I - I0| = {:.3e}", row.k, row.integrals[0], row.integrals[1]);
        }
    }
    Ok(())
}
