//! Certification of plans, trees and samplers.
//!
//! Exact audits recompute every invariant in rational arithmetic and record
//! a witness for each failure. Monte Carlo suites guard the samplers, and
//! the generators produce the random small instances both are run on.

mod audit;
mod generate;
mod monte_carlo;
mod report;

pub use audit::{audit_joint, audit_plan, audit_skorohod, audit_tree};
pub use generate::{random_model, random_pmf, random_spec, ModelBounds, SpecBounds};
pub use monte_carlo::{mc_agreement, mc_decoder_marginals, mc_distance, mc_marginals};
pub use report::{DeficitEntry, ExactCheck, McCheck, Provenance, VerificationReport};
