//! Path integrals of the selected field along stored trajectories.
//!
//! Per stored interval the state is reconstructed by Lagrange interpolation
//! on a stencil of up to four rows confined to one smooth segment (never
//! across a jump or switch), and the integrand is evaluated at three
//! Gauss–Legendre nodes. Both pieces are fourth-order, matching the
//! integrator, so the defect of the integral identity measures genuine
//! inconsistency rather than quadrature noise.

use nalgebra::DVector;

use crate::bvsignal::BVSignal;
use crate::geometry::Point;
use crate::integrate::{EventKind, Trajectory};
use crate::patchfield::PatchyField;

const GL3_NODES: [f64; 3] = [0.11270166537925831, 0.5, 0.8872983346207417];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Row ranges `[a, b]` (inclusive) of the smooth segments of a trajectory:
/// interpolation stencils must stay inside one range.
fn segment_rows(traj: &Trajectory) -> Vec<(usize, usize)> {
    let mut cut_rows = vec![0usize, traj.times.len() - 1];
    for e in &traj.events {
        if matches!(e.kind, EventKind::Switch | EventKind::Jump) {
            // events land exactly on stored rows
            let k = traj.times.partition_point(|&s| s < e.time);
            if k < traj.times.len() && traj.times[k] == e.time {
                cut_rows.push(k);
            }
        }
    }
    cut_rows.sort_unstable();
    cut_rows.dedup();
    cut_rows.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
}

/// Value of the smooth branch at row `j` of a segment starting at row `a`:
/// the right limit at the segment's first row, the stored left limit
/// elsewhere.
fn branch_state(traj: &Trajectory, seg_start: usize, j: usize) -> Point {
    if j == seg_start {
        traj.state_after(j)
    } else {
        traj.states[j].clone()
    }
}

fn lagrange_eval(ts: &[f64], ys: &[Point], t: f64) -> Point {
    let mut out = DVector::zeros(ys[0].len());
    for (i, yi) in ys.iter().enumerate() {
        let mut w = 1.0;
        for (j, &tj) in ts.iter().enumerate() {
            if i != j {
                w *= (t - tj) / (ts[i] - tj);
            }
        }
        out += yi * w;
    }
    out
}

/// Cumulative `∫ g(y(s)) ds` evaluated at every stored time, integrating
/// the patch recorded as active on each interval.
pub fn cumulative_field_integral(traj: &Trajectory, field: &PatchyField) -> Vec<Point> {
    let n = traj.times.len();
    let dim = traj.states[0].len();
    let mut out = Vec::with_capacity(n);
    let mut acc: Point = DVector::zeros(dim);
    out.push(acc.clone());

    let segments = segment_rows(traj);
    let mut seg_cursor = 0usize;
    for k in 0..n - 1 {
        while segments[seg_cursor].1 < k + 1 {
            seg_cursor += 1;
        }
        let (a, b) = segments[seg_cursor];
        let (ta, tb) = (traj.times[k], traj.times[k + 1]);
        let h = tb - ta;
        let idx = traj.active[k];

        // stencil of up to 4 rows inside [a, b] containing [k, k+1]
        let width = (b - a).min(3);
        let start = k.saturating_sub(1).clamp(a, b - width);
        let rows: Vec<usize> = (start..=start + width).collect();
        let ts: Vec<f64> = rows.iter().map(|&j| traj.times[j]).collect();
        let ys: Vec<Point> = rows.iter().map(|&j| branch_state(traj, a, j)).collect();

        for (xi, wgt) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
            let t = ta + h * xi;
            let y = lagrange_eval(&ts, &ys, t);
            acc += field.eval_patch(idx, &y) * (h * wgt);
        }
        out.push(acc.clone());
    }
    out
}

/// Largest defect of `y(t) = y(t0) + ∫ g(y) + (w(t) − w(t0))` over the
/// stored grid, all terms taken as left limits.
pub fn integral_identity_residual(traj: &Trajectory, field: &PatchyField, w: &BVSignal) -> f64 {
    let ints = cumulative_field_integral(traj, field);
    let w0 = w.eval_left(traj.times[0]);
    let mut worst = 0.0f64;
    for (k, t) in traj.times.iter().enumerate() {
        let expect = &traj.states[0] + &ints[k] + (w.eval_left(*t) - &w0);
        worst = worst.max((&traj.states[k] - expect).norm());
    }
    worst
}
