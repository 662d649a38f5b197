//! Checks and studies over solved trajectories.
//!
//! The index history of an unperturbed flow climbs monotonically; bounded
//! perturbations can dent that at most on a set whose measure is controlled
//! by the perturbation's total variation. This module measures those dents
//! (`monotone_partition`), repairs them (`monotone_modification`), gates
//! them against the estimated budgets (`check_prop22_budget`), and runs the
//! batch studies behind the CLI.

mod partition;
mod studies;

pub use partition::{monotone_modification, monotone_partition, MonotonePartition};
pub use studies::{
    build_sampling_plan, convergence_pass, convergence_study, distance_to_solution_set,
    entry_time_into_inset, invariance_checks, robustness_run, sampling_robustness_run,
    CellOutcome, ErrorProfile, InvarianceReport, RobustnessReport,
};

use crate::bvsignal::BVSignal;
use crate::integrate::{SolveError, Trajectory};
use crate::patchfield::RobustnessConstants;

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("partition violates the envelope constraint at cell {cell}: level {level} > history {hist}")]
    PartitionMismatch { cell: usize, level: i64, hist: i64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotoneCheck {
    pub monotone: bool,
    /// start time of the first interval whose index drops below its
    /// predecessor's
    pub first_violation: Option<f64>,
}

/// Is the active-index step function non-decreasing?
pub fn check_index_monotone(traj: &Trajectory) -> MonotoneCheck {
    for k in 1..traj.active.len() {
        if traj.active[k] < traj.active[k - 1] {
            return MonotoneCheck { monotone: false, first_violation: Some(traj.times[k]) };
        }
    }
    MonotoneCheck { monotone: true, first_violation: None }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetOutcome {
    /// excess < c_big · TV{w}
    Holds,
    Violated,
    /// TV{w} ≥ δ: the bound promises nothing there
    Inconclusive,
}

/// Gate the measured excess against the proportionality budget. Only
/// meaningful when the perturbation is within the admissible budget δ;
/// otherwise the outcome is `Inconclusive` rather than a verdict.
pub fn check_prop22_budget(
    part: &MonotonePartition,
    w: &BVSignal,
    consts: &RobustnessConstants,
) -> BudgetOutcome {
    let tv = w.total_variation_span();
    if tv >= consts.delta {
        return BudgetOutcome::Inconclusive;
    }
    if part.excess_measure < consts.c_big * tv {
        BudgetOutcome::Holds
    } else {
        BudgetOutcome::Violated
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, v2};
    use crate::integrate::{solve_caratheodory, solve_impulsive, IntegratorConfig};

    #[test]
    fn unperturbed_flows_are_monotone() {
        let field = fixtures::s2();
        let traj =
            solve_caratheodory(&field, &v2(2.5, 0.0), 0.0, 2.0, &IntegratorConfig::default())
                .unwrap();
        let check = check_index_monotone(&traj);
        assert!(check.monotone);
        assert_eq!(check.first_violation, None);
    }

    #[test]
    fn relocation_jump_breaks_monotonicity_at_its_time() {
        // enter the inner patch, then jump back out into patch-1 territory
        let field = fixtures::s2();
        let w = BVSignal::zero(2, 0.0, 2.0).with_jump(1.0, v2(1.2, 0.0)).unwrap();
        let traj =
            solve_impulsive(&field, &w, &v2(2.5, 0.0), 0.0, 2.0, &IntegratorConfig::default())
                .unwrap();
        let check = check_index_monotone(&traj);
        assert!(!check.monotone);
        assert!((check.first_violation.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn budget_gate_is_inconclusive_above_delta() {
        let field = fixtures::s1();
        let consts = field.estimate_constants(0.1, 128).unwrap();
        let traj =
            solve_caratheodory(&field, &v2(1.0, 0.0), 0.0, 1.0, &IntegratorConfig::default())
                .unwrap();
        let part = monotone_partition(&traj, &field);
        let small = BVSignal::zero(2, 0.0, 1.0).with_jump(0.5, v2(consts.delta * 0.5, 0.0)).unwrap();
        assert_eq!(check_prop22_budget(&part, &small, &consts), BudgetOutcome::Holds);
        let big = BVSignal::zero(2, 0.0, 1.0).with_jump(0.5, v2(consts.delta * 2.0, 0.0)).unwrap();
        assert_eq!(check_prop22_budget(&part, &big, &consts), BudgetOutcome::Inconclusive);
    }
}
