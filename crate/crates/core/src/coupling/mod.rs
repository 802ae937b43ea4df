//! Widening-window coupling in discrete time.
//!
//! Given laws `P_1, P_2, ...` converging in density to `P` in every window,
//! [`build_plan`] materializes a window schedule `k_n`, sub-probability
//! ladders `nu_n` and `mu_n`, and the mixture components of an index `N`
//! and copies `Z, Z_1, Z_2, ...` with `Z_n^{k_n} = Z^{k_n}` whenever
//! `n >= N`. Extension kernels turn the window coupling into a coupling of
//! the full processes.

mod joint;
mod ladder;
mod plan;
mod sampler;
mod schedule;

pub use joint::{exact_joint_law, JointLaw, DEFAULT_ENUMERATION_CAP};
pub use ladder::{build_ladder, extend_nu, extend_window_measure, DensityRatio, MeasureLadder};
pub use plan::{build_plan, index_space, CouplingPlan, ExtensionKernel, KernelRow};
pub use sampler::{CouplingSample, CouplingSampler, DiscreteSampler};
pub use schedule::{build_schedule, WindowSchedule};
