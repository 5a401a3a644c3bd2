//! Discrete vector fields, quadrature, and the norms used by the testers.

mod afk1;
mod domain;
mod grid;
mod norms;
mod periodic;
mod quad;

pub use afk1::{decode_afk1, encode_afk1, read_afk1, write_afk1, write_magnitude_csv, AnyField};
pub(crate) use afk1::write_atomic;
pub use domain::{DomainField, DomainSpec};
pub use grid::GridSpec;
pub use norms::{
    hminus1_dual_norm_masked, hminus1_norm_domain, hminus1_norm_periodic, lp_norm, pair_weak, pcg, DomainNorm,
    CG_MAX_ITER, CG_TOL,
};
pub use periodic::{apply_a_periodic, PeriodicField, Spectrum};
pub use quad::QuadField;

/// Anything that can be integrated by a weighted sum over sample points.
pub trait SampledField: Sync {
    fn dim(&self) -> usize;
    fn components(&self) -> usize;
    /// Visits every quadrature sample as `(x, value, weight)`.
    fn for_each_sample(&self, f: &mut dyn FnMut(&[f64], &[f64], f64));
}

/// A smooth vector-valued test function `x -> w(x)` written into `out`.
pub type VectorFn<'a> = dyn Fn(&[f64], &mut [f64]) + Sync + 'a;
