//! Interior A-quasiconvexity search at a point.

use afreeqc::integrand::IntegrandSpec;
use afreeqc::qctest::{test_aqc, SearchConfig};
use afreeqc::symbol::{catalog, ConstantRankOperator};

fn main() -> afreeqc::error::Result<()> {
    let cfg = SearchConfig::default();
    for (op, integrand, s0) in [("div", "norm_pow", [1.0, 0.0]), ("div", "neg_norm_pow", [0.0, 0.0]), ("cauchy_riemann", "neg_norm_pow", [0.3, -0.4])] {
        let o = ConstantRankOperator::verify(catalog(op, None)?)?;
        let v = IntegrandSpec::named(integrand).build()?;
        let r = test_aqc(&o, v.as_ref(), &s0, &cfg)?;
        let c = &r.certificate;
        println!("{op:>15} {integrand:>13} s0={s0:?}: {:?} objective {:.6e} unbounded below {}", c.status, c.objective, c.unbounded_below);
    }
    Ok(())
}
