//! Pointwise-convergent couplings on finite metric models.
//!
//! The limit law gets a nested tree of continuity cells with diameters
//! shrinking like `1/k`. Each random point is encoded by its cell path (its
//! digit process), the digit processes are coupled by the widening-window
//! engine, and the terminal coordinate decodes back to the model. Whenever
//! `n >= N` the coupled points share a level-`k_n` cell, so
//! `d(X_n, X) < 1/k_n`.

mod coupling;
mod digitize;
mod metric;
mod partition;

pub use coupling::{build_skorohod_coupling, check_weak_convergence, SkorohodCoupling, SkorohodSample, SkorohodSampler};
pub use digitize::{decode, digit_space, digitize, encode};
pub use metric::{continuity_radius, AtomicLaw, Backend, MetricSpaceModel};
pub use partition::{build_partition_tree, Ball, Cell, PartitionTree};
