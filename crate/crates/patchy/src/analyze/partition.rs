//! Optimal monotone envelopes of index histories, and the trajectory
//! modification that realizes them.


use serde::{Deserialize, Serialize};

use crate::analyze::AnalyzeError;
use crate::bvsignal::{AcKind, AcPiece, BVSignal};
use crate::geometry::Point;
use crate::integrate::{quadrature, Event, EventKind, Trajectory};
use crate::patchfield::{PatchIndex, PatchyField};

/// A non-decreasing step envelope under a trajectory's index history.
///
/// `taus` are the segment boundaries (first = start time, last = end time);
/// `indices[j]` is the strictly increasing level on `(taus[j], taus[j+1]]`.
/// `excess_measure` is the total width of the grid cells where the history
/// lies strictly above the envelope.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonePartition {
    pub taus: Vec<f64>,
    pub indices: Vec<PatchIndex>,
    pub excess_measure: f64,
}

impl MonotonePartition {
    /// Envelope level on the interval containing `t` (intervals are
    /// left-open, matching the trajectory convention).
    pub fn level_at(&self, t: f64) -> PatchIndex {
        let j = self.taus.partition_point(|&s| s < t);
        self.indices[j.saturating_sub(1).min(self.indices.len() - 1)]
    }
}

/// Minimum-excess monotone envelope below the trajectory's index history,
/// over candidate levels drawn from the field's index set.
///
/// Dynamic program over (grid cell, level): a cell priced zero iff its
/// level equals its history value, by its width otherwise, with levels
/// non-decreasing along the grid and never above the history. Among
/// equal-excess optima the envelope that stays low longest (switches as
/// late as possible) is returned, which keeps the result deterministic.
pub fn monotone_partition(traj: &Trajectory, field: &PatchyField) -> MonotonePartition {
    let cells = traj.active.len();
    assert!(cells > 0, "trajectory has no intervals");
    let levels = field.indices();
    let m = levels.len();

    // dp[c][l]: minimal excess over cells 0..=c with the envelope at
    // levels[l] on cell c
    let width = |c: usize| traj.times[c + 1] - traj.times[c];
    let cost = |c: usize, l: usize| -> f64 {
        let hist = traj.active[c];
        if levels[l] > hist {
            f64::INFINITY
        } else if levels[l] == hist {
            0.0
        } else {
            width(c)
        }
    };

    let mut dp = vec![vec![f64::INFINITY; m]; cells];
    for l in 0..m {
        dp[0][l] = cost(0, l);
    }
    for c in 1..cells {
        let mut best = f64::INFINITY;
        for l in 0..m {
            best = best.min(dp[c - 1][l]);
            dp[c][l] = cost(c, l) + best;
        }
    }

    // backtrack: final level = highest argmin; stepping backward prefer
    // staying on the same level
    let mut choice = vec![0usize; cells];
    let mut l = (0..m)
        .rev()
        .min_by(|&a, &b| dp[cells - 1][a].total_cmp(&dp[cells - 1][b]))
        .unwrap();
    choice[cells - 1] = l;
    for c in (1..cells).rev() {
        let need = dp[c][l] - cost(c, l);
        let mut pick = None;
        for cand in (0..=l).rev() {
            if dp[c - 1][cand] == need {
                if cand == l {
                    pick = Some(cand);
                    break;
                }
                if pick.is_none() {
                    pick = Some(cand);
                }
            }
        }
        l = pick.expect("dp backtrack is consistent");
        choice[c - 1] = l;
    }

    let excess_measure: f64 = (0..cells).map(|c| cost(c, choice[c])).sum();
    let mut taus = vec![traj.times[0]];
    let mut indices = vec![levels[choice[0]]];
    for c in 1..cells {
        if choice[c] != choice[c - 1] {
            taus.push(traj.times[c]);
            indices.push(levels[choice[c]]);
        }
    }
    taus.push(traj.t_end());
    MonotonePartition { taus, indices, excess_measure }
}

/// Replace the off-envelope stretches of a perturbed path by frozen states
/// so the selected index climbs monotonically, and return the BV input
/// that makes the frozen path an exact perturbed solution.
///
/// On cells where history and envelope agree, the output follows the input
/// path exactly (including its jumps). On the excess cells it holds the
/// last on-envelope sample (the pre-dip state); if an excess run opens a
/// partition segment, it holds the segment's first on-envelope sample
/// instead. Every transition back to the path becomes a jump of the output
/// signal. When the input is already monotone (zero excess), the pair is
/// returned verbatim.
pub fn monotone_modification(
    y: &Trajectory,
    w: &BVSignal,
    part: &MonotonePartition,
    field: &PatchyField,
) -> Result<(Trajectory, BVSignal), AnalyzeError> {
    let cells = y.active.len();
    let level: Vec<PatchIndex> = (0..cells)
        .map(|c| part.level_at(0.5 * (y.times[c] + y.times[c + 1])))
        .collect();
    for c in 0..cells {
        if level[c] > y.active[c] {
            return Err(AnalyzeError::PartitionMismatch {
                cell: c,
                level: level[c].0,
                hist: y.active[c].0,
            });
        }
    }
    if part.excess_measure == 0.0 {
        return Ok((y.clone(), w.clone()));
    }

    let follow: Vec<bool> = (0..cells).map(|c| level[c] == y.active[c]).collect();
    // partition segment id per cell, to scope anchor lookups
    let seg: Vec<usize> = (0..cells)
        .map(|c| {
            let mid = 0.5 * (y.times[c] + y.times[c + 1]);
            part.taus.partition_point(|&s| s < mid).saturating_sub(1).min(part.indices.len() - 1)
        })
        .collect();

    // anchor of an excess cell: the frozen state it holds
    let anchor_of = |c: usize| -> Point {
        // nearest earlier follow cell in the same segment → its last sample
        // still selecting the cell's own level (a switch row at the cell
        // end already lies marginally inside the next patch, so fall back
        // to the cell's start sample in that case)
        for b in (0..c).rev() {
            if seg[b] != seg[c] {
                break;
            }
            if follow[b] {
                let end = y.states[b + 1].clone();
                if field.alpha_star_opt(&end) == Some(y.active[b]) {
                    return end;
                }
                return y.state_after(b);
            }
        }
        // else the first later follow cell in the segment → its start
        // sample (right value)
        for f in c + 1..cells {
            if seg[f] != seg[c] {
                break;
            }
            if follow[f] {
                return y.state_after(f);
            }
        }
        // no on-envelope cell in the whole segment: hold the segment's
        // opening sample
        let first = (0..=c).rev().find(|&b| seg[b] != seg[c]).map_or(0, |b| b + 1);
        y.state_after(first)
    };

    let n = y.times.len();
    let mut states = Vec::with_capacity(n);
    let mut active = Vec::with_capacity(cells);
    let mut events: Vec<Event> = Vec::new();
    let mut jumps: Vec<(f64, Point)> = Vec::new();
    states.push(y.states[0].clone());

    let mut current_anchor: Option<Point> = None;
    for c in 0..cells {
        let t_start = y.times[c];
        if follow[c] {
            // left value at the cell's end is the path's own sample
            states.push(y.states[c + 1].clone());
            let from_frozen = current_anchor.take();
            let start_right = y.state_after(c);
            let resume_delta = match &from_frozen {
                Some(a) => &start_right - a,
                // follow → follow: inherit the path's own jump, if any
                None => &start_right - &y.states[c],
            };
            if resume_delta.norm() > 0.0 {
                jumps.push((t_start, resume_delta.clone()));
                events.push(Event {
                    time: t_start,
                    kind: EventKind::Jump,
                    from_index: active.last().copied().or(Some(y.active[c])),
                    to_index: Some(y.active[c]),
                    displacement: Some(resume_delta),
                });
            }
            active.push(y.active[c]);
        } else {
            let a = anchor_of(c);
            let moved = match &current_anchor {
                Some(prev) => &a - prev,
                None => &a - &y.states[c],
            };
            let sel = field.alpha_star_opt(&a).unwrap_or(level[c]);
            if moved.norm() > 0.0 {
                jumps.push((t_start, moved.clone()));
                events.push(Event {
                    time: t_start,
                    kind: EventKind::Jump,
                    from_index: active.last().copied().or(Some(sel)),
                    to_index: Some(sel),
                    displacement: Some(moved),
                });
            }
            states.push(a.clone());
            active.push(sel);
            current_anchor = Some(a);
        }
    }

    // switch events where the modified index climbs without a jump
    for c in 1..cells {
        if active[c] != active[c - 1] && !jumps.iter().any(|(t, _)| *t == y.times[c]) {
            events.push(Event {
                time: y.times[c],
                kind: EventKind::Switch,
                from_index: Some(active[c - 1]),
                to_index: Some(active[c]),
                displacement: None,
            });
        }
    }
    events.push(Event {
        time: y.times[0],
        kind: EventKind::Start,
        from_index: None,
        to_index: Some(active[0]),
        displacement: None,
    });
    events.sort_by(|a, b| a.time.total_cmp(&b.time));

    let modified = Trajectory { times: y.times.clone(), states, active, events };

    // the input that the frozen path solves exactly:
    // w◊(t) = w(t0) + y◊(t) − y◊(t0) − ∫ g(y◊)
    let (t0, t_end) = w.span();
    let ints = quadrature::cumulative_field_integral(&modified, field);
    let mut rates = Vec::with_capacity(cells);
    for c in 0..cells {
        let h = modified.times[c + 1] - modified.times[c];
        let smooth_drift = &modified.states[c + 1] - modified.state_after(c);
        let cell_int = &ints[c + 1] - &ints[c];
        rates.push((smooth_drift - cell_int) / h);
    }
    let mut w_mod = BVSignal::new(w.eval_left(t0), t0, t_end);
    for (t, delta) in jumps {
        // a frozen run opening the very first cell displaces the path "at
        // t0+"; the signal convention needs a strictly interior jump time
        let tj = if t == t0 { t0 + 1e-9 * (t_end - t0) } else { t };
        w_mod = w_mod.with_jump(tj, delta).expect("jump times lie inside the span");
    }
    let grid = AcPiece::new(
        t0,
        t_end,
        AcKind::GridConstant { times: modified.times.clone(), rates },
    )
    .expect("trajectory grid is a valid piece");
    w_mod = w_mod.with_ac_piece(grid).expect("piece spans the signal");

    Ok((modified, w_mod))
}
