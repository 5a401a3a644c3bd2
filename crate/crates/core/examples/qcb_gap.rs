//! Strong boundary tester against the periodic tester, for the three planar operators.

use afreeqc::integrand::{HomogeneousIntegrand, IntegrandSpec};
use afreeqc::qctest::{qcb_gap_probe, SearchConfig};
use afreeqc::symbol::{catalog, ConstantRankOperator};

fn main() -> afreeqc::error::Result<()> {
    let cfg = SearchConfig::default();
    for name in ["div", "cauchy_riemann", "curl2d"] {
        let o = ConstantRankOperator::verify(catalog(name, None)?)?;
        let v = HomogeneousIntegrand::from_spec(&IntegrandSpec::named("neg_norm_pow"), o.op().m(), o.op().n())?;
        let g = qcb_gap_probe(&o, &v, &[1.0, 0.0], 0.5, 0.5, 0.1, &cfg)?;
        let (s, p) = (&g.strong.certificate, &g.periodic.certificate);
        println!(
            "{name:>15}: strong {:?} ({:.4}, ratio {:.3})  periodic {:?} ({:.4})  agree {}",
            s.status, s.objective, s.constraint_ratio, p.status, p.objective, g.agree
        );
    }
    Ok(())
}
