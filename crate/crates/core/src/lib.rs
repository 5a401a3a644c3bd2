//! Constant-rank first-order operators, spectral projection onto `A`-free
//! fields, negative Sobolev norms on periodic and masked domains, and
//! search-based probes of quasiconvexity at the boundary.

pub mod error;
pub mod experiment;
pub mod fields;
pub mod integrand;
pub mod profiles;
pub mod projection;
pub mod qctest;
pub mod sequences;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
