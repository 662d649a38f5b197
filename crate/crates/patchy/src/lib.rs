//! Patchy vector fields: ordered families of smooth patches with an
//! inward-pointing selection rule, the discontinuous flows they generate, and
//! executable robustness checks for the feedback loops built on top of them.
//!
//! A *patchy field* is a finite family of open domains `Ω_α` with smooth
//! fields `g_α`, indexed by a total order. At a point `x` the active patch is
//! the largest index whose domain contains `x`, and the field evaluates to
//! that patch's `g_α`. Trajectories of such fields switch patches at domain
//! crossings; the crate integrates them (exactly-located switching events,
//! state jumps driven by bounded-variation signals, sample-and-hold feedback
//! loops) and quantifies how far perturbed runs stray from the unperturbed
//! solution set.
//!
//! The crate is organised as a library with one thin `patchy` binary on top.
//! The `examples/` directory is the front door — one runnable program per
//! capability:
//!
//! ```text
//! examples/
//!   validate_field.rs        inward-margin validation report for a scenario
//!   caratheodory_flow.rs     switching flow of an unperturbed patchy field
//!   impulsive_jump.rs        flow driven by a BV signal with a state jump
//!   perturbed_feedback.rs    measurement noise + disturbance, and the
//!                            equivalent impulsive reformulation
//!   sample_and_hold.rs       sampling solutions on a staggered partition
//!   branching_solutions.rs   solution-set enumeration at a tangency
//!   monotone_partition.rs    optimal index envelope + trajectory surgery
//!   constants_budget.rs      robustness constants estimated from a scenario
//!   robustness_experiment.rs batch perturbed-feedback verdicts on a grid
//!   invariance_regions.rs    inset invariance and collar entry times
//! ```
//!
//! Run one with `cargo run --example caratheodory_flow`. The same machinery
//! is scriptable through scenario files and the CLI (`patchy validate`,
//! `patchy run`, `patchy study`); see the `cli` module.

pub mod analyze;
pub mod bvsignal;
pub mod cli;
pub mod geometry;
pub mod integrate;
pub mod lowdisc;
pub mod patchfield;
pub mod scenario;

#[cfg(test)]
pub(crate) mod fixtures;

pub use bvsignal::{AcSignal, BVSignal, SamplingPlan};
pub use geometry::{Point, SmoothDomain};
pub use integrate::{IntegratorConfig, SolveError, Trajectory};
pub use patchfield::{Patch, PatchIndex, PatchyFeedback, PatchyField, RobustnessConstants};
