//! Enumeration of solution branches at tangential boundary contacts.
//!
//! The selected flow is unique except where a path touches the boundary of
//! a higher-indexed domain with zero normal speed: there both "enter" and
//! "pass by" continue as valid solutions. Contacts are detected per
//! accepted step by fitting a parabola to the (negated) level value of each
//! higher patch at the step's endpoints and midpoint; an interior maximum
//! reaching `-GRAZE_EPS` fires a fork. Transversal crossings change the
//! selection inside the step and are handled by ordinary switching, so they
//! never fork.

use super::{
    build_timeline, rk4, solve_caratheodory, Driver, Event, EventKind, IntegratorConfig, Side,
    SolveError, Trajectory,
};
use crate::bvsignal::AcSignal;
use crate::geometry::Point;
use crate::patchfield::{PatchIndex, PatchyField};

const GRAZE_EPS: f64 = 1e-6;
/// refire suppression window per patch, in units of dt
const REFIRE_STEPS: f64 = 10.0;

/// All solution branches from `x0` over `[t0, t_end]`, canonical flow
/// first. Further entries differ by entering some grazed domain; branches
/// that later leave every patch are discarded. Errors with `BranchOverflow`
/// when more than `branch_cap` distinct solutions exist.
pub fn enumerate_solutions(
    field: &PatchyField,
    x0: &Point,
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
    branch_cap: usize,
) -> Result<Vec<Trajectory>, SolveError> {
    if branch_cap == 0 {
        return Err(SolveError::BranchOverflow(0));
    }
    let canonical = solve_caratheodory(field, x0, t0, t_end, cfg)?;

    let zero_ac = AcSignal::zero(field.dim());
    let driver = super::FieldDriver { field, ac: &zero_ac, jump_list: Vec::new() };
    let timeline = build_timeline(t0, t_end, cfg.dt, &[]);
    let mut ex = Explorer { field, driver, cfg, timeline, cap: branch_cap, leaves: Vec::new() };

    let alpha0 = field.alpha_star_opt(x0).expect("canonical solve succeeded");
    let mut seed = Trajectory::start(t0, x0.clone());
    seed.events.push(Event {
        time: t0,
        kind: EventKind::Start,
        from_index: None,
        to_index: Some(alpha0),
        displacement: None,
    });
    ex.explore(0, t0, x0.clone(), alpha0, seed, Vec::new())?;

    let canon_sig = signature(&canonical);
    let mut out = vec![canonical];
    for leaf in ex.leaves {
        if signature(&leaf) != canon_sig {
            out.push(leaf);
        }
    }
    if out.len() > branch_cap {
        return Err(SolveError::BranchOverflow(branch_cap));
    }
    Ok(out)
}

fn signature(traj: &Trajectory) -> Vec<(u8, i64, i64, u64)> {
    traj.events
        .iter()
        .map(|e| {
            let kind = match e.kind {
                EventKind::Start => 0u8,
                EventKind::Switch => 1,
                EventKind::Jump => 2,
                EventKind::Exit => 3,
            };
            (
                kind,
                e.from_index.map_or(i64::MIN, |p| p.0),
                e.to_index.map_or(i64::MIN, |p| p.0),
                e.time.to_bits(),
            )
        })
        .collect()
}

struct Explorer<'a> {
    field: &'a PatchyField,
    driver: super::FieldDriver<'a>,
    cfg: &'a IntegratorConfig,
    timeline: Vec<f64>,
    cap: usize,
    leaves: Vec<Trajectory>,
}

impl Explorer<'_> {
    /// Integrate from `(t, x)` in patch `alpha` to the end of the
    /// timeline, forking at each grazing contact. `fired` suppresses
    /// refires: (patch, time) pairs already branched on this path.
    #[allow(clippy::too_many_arguments)]
    fn explore(
        &mut self,
        cursor: usize,
        mut t: f64,
        mut x: Point,
        mut alpha: PatchIndex,
        mut traj: Trajectory,
        mut fired: Vec<(PatchIndex, f64)>,
    ) -> Result<(), SolveError> {
        let mut n_events = traj.events.len();
        for ti in cursor..self.timeline.len() {
            let next_t = self.timeline[ti];
            if next_t <= t {
                continue;
            }
            loop {
                let h = next_t - t;
                if h <= 0.0 {
                    break;
                }
                let x_try = rk4(&self.driver, alpha, t, &x, h);
                if self.driver.select(t + h, &x_try, Side::Left) == Some(alpha) {
                    // clean step: probe higher patches for tangential contact
                    if let Some((s_star, beta, x_star)) = self.graze_probe(alpha, t, &x, h, &fired)
                    {
                        let t_star = t + s_star;
                        fired.push((beta, t_star));
                        // enter branch: pre-contact row, switch, snap inside
                        let mut enter = traj.clone();
                        if t_star > t {
                            enter.push_row(t_star, x_star.clone(), alpha);
                        }
                        enter.events.push(Event {
                            time: t_star,
                            kind: EventKind::Switch,
                            from_index: Some(alpha),
                            to_index: Some(beta),
                            displacement: None,
                        });
                        let x_in = snap_inside(self.field, beta, &x_star);
                        match self.explore(ti, t_star, x_in, beta, enter, fired.clone()) {
                            Ok(()) => {}
                            Err(SolveError::OutsideDomain { .. }) => {} // dead branch
                            Err(e) => return Err(e),
                        }
                    }
                    t = next_t;
                    x = x_try;
                    traj.push_row(t, x.clone(), alpha);
                    break;
                }
                // ordinary switch/exit localization, as in the plain solver
                let (mut lo, mut hi) = (0.0f64, h);
                while hi - lo > self.cfg.event_tol {
                    let mid = 0.5 * (lo + hi);
                    let xm = rk4(&self.driver, alpha, t, &x, mid);
                    if self.driver.select(t + mid, &xm, Side::Left) == Some(alpha) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let x_probe = rk4(&self.driver, alpha, t, &x, hi);
                let new_sel = self.driver.select(t + hi, &x_probe, Side::Left);
                match new_sel {
                    None => {
                        // exits end on the last in-domain state (left end)
                        let t_ev = t + lo;
                        if lo > 0.0 {
                            let x_ev = rk4(&self.driver, alpha, t, &x, lo);
                            traj.push_row(t_ev, x_ev, alpha);
                        }
                        traj.events.push(Event {
                            time: t_ev,
                            kind: EventKind::Exit,
                            from_index: Some(alpha),
                            to_index: None,
                            displacement: None,
                        });
                        return Err(SolveError::OutsideDomain {
                            time: t_ev,
                            partial: Box::new(traj),
                        });
                    }
                    Some(beta) => {
                        // switches commit at the right bracket end, whose
                        // state selects `beta` — same convention as the
                        // plain solver, keeping branch 0 bit-identical
                        let t_ev = t + hi;
                        traj.push_row(t_ev, x_probe.clone(), alpha);
                        n_events += 1;
                        if n_events > self.cfg.max_events {
                            return Err(SolveError::EventOverflow {
                                time: t_ev,
                                max: self.cfg.max_events,
                                partial: Box::new(traj),
                            });
                        }
                        traj.events.push(Event {
                            time: t_ev,
                            kind: EventKind::Switch,
                            from_index: Some(alpha),
                            to_index: Some(beta),
                            displacement: None,
                        });
                        alpha = beta;
                        t = t_ev;
                        x = x_probe;
                    }
                }
            }
        }
        if self.leaves.len() >= self.cap + 1 {
            return Err(SolveError::BranchOverflow(self.cap));
        }
        self.leaves.push(traj);
        Ok(())
    }

    /// Earliest tangential contact with a higher patch inside a clean step,
    /// as (offset, patch, contact state).
    fn graze_probe(
        &self,
        alpha: PatchIndex,
        t: f64,
        x: &Point,
        h: f64,
        fired: &[(PatchIndex, f64)],
    ) -> Option<(f64, PatchIndex, Point)> {
        let mut best: Option<(f64, PatchIndex)> = None;
        let mut x_mid: Option<Point> = None;
        for patch in self.field.patches().iter().rev() {
            let beta = patch.index;
            if beta <= alpha {
                break;
            }
            let psi0 = patch.domain.psi(x);
            if psi0 <= 0.0 {
                continue; // already inside: selection handles it
            }
            // cheap reject: the level value cannot dip near zero this step
            let scale = 1.0 + patch.domain.bounding_radius();
            if psi0 > scale {
                continue;
            }
            if fired
                .iter()
                .any(|(b, tf)| *b == beta && (t - tf).abs() < REFIRE_STEPS * self.cfg.dt)
            {
                continue;
            }
            let xm = x_mid
                .get_or_insert_with(|| rk4(&self.driver, alpha, t, x, 0.5 * h))
                .clone();
            let x_end = rk4(&self.driver, alpha, t, x, h);
            let (m0, mm, mh) =
                (-psi0, -patch.domain.psi(&xm), -patch.domain.psi(&x_end));
            // parabola m(s) = a s² + b s + c through the three samples
            let c = m0;
            let a = (2.0 * m0 - 4.0 * mm + 2.0 * mh) / (h * h);
            let b = (-3.0 * m0 + 4.0 * mm - mh) / h;
            if a >= 0.0 {
                continue;
            }
            let s_star = -b / (2.0 * a);
            // accept vertices slightly outside the step so a contact landing
            // exactly on a grid point is still caught (once — refires are
            // suppressed); the used offset stays strictly inside the step
            if !(s_star > -0.25 * h && s_star < 1.25 * h) {
                continue;
            }
            let v = c + s_star * (b + s_star * a);
            if v >= -GRAZE_EPS {
                let s_used = s_star.clamp(1e-3 * h, (1.0 - 1e-3) * h);
                if best.is_none_or(|(s, _)| s_used < s) {
                    best = Some((s_used, beta));
                }
            }
        }
        best.map(|(s, beta)| {
            let xs = rk4(&self.driver, alpha, t, x, s);
            (s, beta, xs)
        })
    }
}

/// Nudge a contact state strictly inside a patch domain along the inward
/// normal; the displacement is far below every tolerance in play.
fn snap_inside(field: &PatchyField, beta: PatchIndex, x: &Point) -> Point {
    let domain = &field.patch(beta).expect("known index").domain;
    let psi = domain.psi(x);
    if psi < 0.0 {
        return x.clone();
    }
    let g = domain.grad_psi(x);
    let n2 = g.norm_squared().max(1e-18);
    x - g * ((psi + 1e-9) / n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, v2};

    #[test]
    fn tangential_contact_yields_two_solutions() {
        let field = fixtures::tangency();
        let cfg = IntegratorConfig::default();
        let sols = enumerate_solutions(&field, &v2(-3.0, 0.0), 0.0, 4.0, &cfg, 8).unwrap();
        assert_eq!(sols.len(), 2, "pass-by and enter");
        // canonical passes straight through to (1, 0)
        assert!((sols[0].final_state() - v2(1.0, 0.0)).norm() < 1e-6);
        // the entering branch contracts toward the grazed disk's center for
        // the remaining ≈1 time unit: distance e^{-(4-t_c)} ≈ e^{-1}
        let entered = &sols[1];
        assert_eq!(entered.active.last().copied(), Some(crate::patchfield::PatchIndex(2)));
        let dist = (entered.final_state() - v2(0.0, 1.0)).norm();
        assert!((dist - (-1.0f64).exp()).abs() < 0.05, "dist = {dist}");
        // the contact happens where the path touches the disk: near the origin, t ≈ 3
        let sw = entered.switch_times();
        assert_eq!(sw.len(), 1);
        assert!((sw[0] - 3.0).abs() < 0.05, "t = {}", sw[0]);
    }

    #[test]
    fn canonical_output_is_included_verbatim() {
        let field = fixtures::tangency();
        let cfg = IntegratorConfig::default();
        let direct = solve_caratheodory(&field, &v2(-3.0, 0.0), 0.0, 4.0, &cfg).unwrap();
        let sols = enumerate_solutions(&field, &v2(-3.0, 0.0), 0.0, 4.0, &cfg, 8).unwrap();
        assert_eq!(sols[0].times, direct.times);
        assert_eq!(sols[0].states, direct.states);
        assert_eq!(sols[0].active, direct.active);
    }

    #[test]
    fn transversal_crossings_do_not_branch() {
        let field = fixtures::s2();
        let cfg = IntegratorConfig::default();
        let sols = enumerate_solutions(&field, &v2(2.5, 0.0), 0.0, 2.0, &cfg, 8).unwrap();
        assert_eq!(sols.len(), 1, "a clean transversal entry is unique");
        assert_eq!(sols[0].switch_times().len(), 1);
    }

    #[test]
    fn offset_paths_missing_the_disk_do_not_branch() {
        let field = fixtures::tangency();
        let cfg = IntegratorConfig::default();
        // passing well below the disk: no contact at all
        let sols = enumerate_solutions(&field, &v2(-3.0, -1.0), 0.0, 4.0, &cfg, 8).unwrap();
        assert_eq!(sols.len(), 1);
    }

    #[test]
    fn branch_cap_is_enforced() {
        let field = fixtures::tangency();
        let cfg = IntegratorConfig::default();
        let r = enumerate_solutions(&field, &v2(-3.0, 0.0), 0.0, 4.0, &cfg, 1);
        assert!(matches!(r, Err(SolveError::BranchOverflow(1))));
    }
}
