//! Exact couplings for sequences of discrete process laws.
//!
//! * [`measure`]: rational mass functions, window marginals, infimum densities.
//! * [`coupling`]: the widening-window coupling and its sampler.
//! * [`skorohod`]: digitization of finite metric models into digit
//!   processes, yielding pointwise-convergent couplings.
//! * [`verify`]: exact audits and Monte Carlo guards.
//! * [`serial`]: JSON documents for specs, plans, models, trees and reports.

pub mod coupling;
pub mod error;
pub mod measure;
pub mod rational;
pub mod rng;
pub mod serial;
pub mod skorohod;
pub mod verify;

pub use error::{Error, Result};
