//! Trajectory integration under the selection rule.
//!
//! One fixed-step RK4 core drives every solver. The step grid is the
//! uniform `dt` lattice merged with all forced times (signal kinks, jump
//! times, sampling instants), so results never depend on how events landed
//! relative to steps. After each trial step the selection is re-evaluated;
//! a change is localized by bisection over partial steps to within
//! `event_tol`, recorded as an event, and integration resumes from the
//! localized state. Everything is pure `f64` arithmetic — reruns are
//! bitwise identical.

mod branch;
pub mod quadrature;

pub use branch::enumerate_solutions;


use crate::bvsignal::{AcSignal, BVSignal, SamplingPlan};
use crate::geometry::Point;
use crate::patchfield::{FieldError, PatchIndex, PatchyFeedback, PatchyField};

#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// event times are localized to within this width
    pub event_tol: f64,
    /// cap on switch/jump events before giving up
    pub max_events: usize,
    /// seed consumed by study drivers that generate inputs; the core
    /// integrator itself draws no randomness
    pub rng_seed: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { dt: 1e-3, event_tol: 1e-6, max_events: 10_000, rng_seed: 0 }
    }
}

impl IntegratorConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_event_tol(mut self, tol: f64) -> Self {
        self.event_tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Start,
    Switch,
    Jump,
    Exit,
}

#[derive(Clone, Debug)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub from_index: Option<PatchIndex>,
    pub to_index: Option<PatchIndex>,
    /// state displacement applied at `time` (jumps only)
    pub displacement: Option<Point>,
}

/// A stored solution path.
///
/// `times` is strictly increasing. `states[k]` is the left limit at
/// `times[k]`: at a jump time it holds the pre-jump state, and the post-jump
/// state is `state_after(k)`. `active[i]` is the patch index selected on the
/// interval `(times[i], times[i+1]]`, so `active.len() == times.len() - 1`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Point>,
    pub active: Vec<PatchIndex>,
    pub events: Vec<Event>,
}

impl Trajectory {
    fn start(t0: f64, x0: Point) -> Self {
        Trajectory { times: vec![t0], states: vec![x0], active: Vec::new(), events: Vec::new() }
    }

    fn push_row(&mut self, t: f64, x: Point, alpha: PatchIndex) {
        debug_assert!(t > *self.times.last().unwrap());
        self.times.push(t);
        self.states.push(x);
        self.active.push(alpha);
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_state(&self) -> &Point {
        self.states.last().unwrap()
    }

    /// State just after `times[k]`: the stored state plus any jump applied
    /// there.
    pub fn state_after(&self, k: usize) -> Point {
        let t = self.times[k];
        let mut x = self.states[k].clone();
        for e in &self.events {
            if e.kind == EventKind::Jump && e.time == t {
                if let Some(d) = &e.displacement {
                    x += d;
                }
            }
        }
        x
    }

    /// Left-limit state at an arbitrary time, linearly interpolated between
    /// stored rows. Clamps outside the stored span.
    pub fn sample(&self, t: f64) -> Point {
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.t_end() {
            return self.states.last().unwrap().clone();
        }
        // first k with times[k] >= t
        let k = self.times.partition_point(|&s| s < t);
        if self.times[k] == t {
            return self.states[k].clone();
        }
        let (ta, tb) = (self.times[k - 1], self.times[k]);
        let w = (t - ta) / (tb - ta);
        let a = self.state_after(k - 1);
        &a + (&self.states[k] - &a) * w
    }

    /// Index active at time `t` per the interval convention; at `t0` the
    /// first interval's index is reported.
    pub fn active_at(&self, t: f64) -> PatchIndex {
        if self.active.is_empty() {
            panic!("trajectory has no intervals");
        }
        if t <= self.times[0] {
            return self.active[0];
        }
        let k = self.times.partition_point(|&s| s < t);
        self.active[(k - 1).min(self.active.len() - 1)]
    }

    /// Spans between consecutive event times (plus the endpoints). On each
    /// span the path is a single smooth branch: no jumps, no selection
    /// changes strictly inside.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        let mut cuts = vec![self.times[0], self.t_end()];
        for e in &self.events {
            if e.time > self.times[0] && e.time < self.t_end() {
                cuts.push(e.time);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
    }

    pub fn switch_times(&self) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Switch)
            .map(|e| e.time)
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("state left every patch domain at t = {time}")]
    OutsideDomain { time: f64, partial: Box<Trajectory> },
    #[error("exceeded {max} events at t = {time}")]
    EventOverflow { time: f64, max: usize, partial: Box<Trajectory> },
    #[error("solution tree exceeded the branch cap {0}")]
    BranchOverflow(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("bad integrator configuration: {0}")]
    BadConfig(String),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// What a solver family must provide to the shared stepping core.
trait Driver {
    fn select(&self, t: f64, x: &Point, side: Side) -> Option<PatchIndex>;
    fn rhs(&self, idx: PatchIndex, t: f64, x: &Point) -> Point;
    /// displacement jumps (time, delta), strictly inside the span, sorted
    fn jumps(&self) -> Vec<(f64, Point)>;
    /// forced grid times beyond the uniform lattice
    fn breaks(&self, lo: f64, hi: f64) -> Vec<f64>;
    /// times where the selection may move discontinuously without a state
    /// jump (e.g. measurement-noise jumps)
    fn reselect_times(&self) -> Vec<f64>;
}

fn rk4<D: Driver + ?Sized>(driver: &D, idx: PatchIndex, t: f64, x: &Point, h: f64) -> Point {
    let k1 = driver.rhs(idx, t, x);
    let k2 = driver.rhs(idx, t + 0.5 * h, &(x + &k1 * (0.5 * h)));
    let k3 = driver.rhs(idx, t + 0.5 * h, &(x + &k2 * (0.5 * h)));
    let k4 = driver.rhs(idx, t + h, &(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

fn build_timeline(t0: f64, t_end: f64, dt: f64, forced: &[f64]) -> Vec<f64> {
    let mut timeline = Vec::new();
    let steps = ((t_end - t0) / dt).ceil() as usize;
    for k in 1..=steps {
        let t = t0 + k as f64 * dt;
        if t < t_end - 1e-12 * dt.max(1.0) {
            timeline.push(t);
        }
    }
    for &t in forced {
        if t > t0 && t <= t_end {
            timeline.push(t);
        }
    }
    timeline.push(t_end);
    timeline.sort_by(f64::total_cmp);
    timeline.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));
    timeline
}

fn drive<D: Driver + ?Sized>(
    driver: &D,
    x0: &Point,
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, SolveError> {
    if !(cfg.dt > 0.0) {
        return Err(SolveError::BadConfig(format!("dt must be positive, got {}", cfg.dt)));
    }
    if !(t_end > t0) {
        return Err(SolveError::BadConfig(format!("empty time span [{t0}, {t_end}]")));
    }
    if !(cfg.event_tol > 0.0 && cfg.event_tol <= cfg.dt) {
        return Err(SolveError::BadConfig(format!(
            "event_tol must lie in (0, dt], got {}",
            cfg.event_tol
        )));
    }

    let jumps = driver.jumps();
    let reselects = driver.reselect_times();
    let mut forced = driver.breaks(t0, t_end);
    forced.extend(jumps.iter().map(|j| j.0));
    forced.extend(reselects.iter().copied());
    let timeline = build_timeline(t0, t_end, cfg.dt, &forced);

    let mut traj = Trajectory::start(t0, x0.clone());
    let mut x = x0.clone();
    let mut t = t0;
    let Some(mut alpha) = driver.select(t0, &x, Side::Right) else {
        traj.events.push(Event {
            time: t0,
            kind: EventKind::Exit,
            from_index: None,
            to_index: None,
            displacement: None,
        });
        return Err(SolveError::OutsideDomain { time: t0, partial: Box::new(traj) });
    };
    traj.events.push(Event {
        time: t0,
        kind: EventKind::Start,
        from_index: None,
        to_index: Some(alpha),
        displacement: None,
    });

    let mut n_events = 0usize;
    let mut jump_cursor = 0usize;
    let mut reselect_cursor = 0usize;

    for &next_t in &timeline {
        if next_t <= t {
            continue;
        }
        // integrate to next_t, localizing any selection change on the way
        loop {
            let h = next_t - t;
            if h <= 0.0 {
                break;
            }
            let x_try = rk4(driver, alpha, t, &x, h);
            if driver.select(t + h, &x_try, Side::Left) == Some(alpha) {
                t = next_t;
                x = x_try;
                traj.push_row(t, x.clone(), alpha);
                break;
            }
            // bisect the earliest change in (t, t+h]
            let (mut lo, mut hi) = (0.0f64, h);
            while hi - lo > cfg.event_tol {
                let mid = 0.5 * (lo + hi);
                let xm = rk4(driver, alpha, t, &x, mid);
                if driver.select(t + mid, &xm, Side::Left) == Some(alpha) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x_probe = rk4(driver, alpha, t, &x, hi);
            let new_sel = driver.select(t + hi, &x_probe, Side::Left);
            match new_sel {
                None => {
                    // end the path on its last stored in-domain state: the
                    // left bracket end, still selecting `alpha`
                    let t_ev = t + lo;
                    if lo > 0.0 {
                        let x_ev = rk4(driver, alpha, t, &x, lo);
                        traj.push_row(t_ev, x_ev, alpha);
                    }
                    traj.events.push(Event {
                        time: t_ev,
                        kind: EventKind::Exit,
                        from_index: Some(alpha),
                        to_index: None,
                        displacement: None,
                    });
                    return Err(SolveError::OutsideDomain { time: t_ev, partial: Box::new(traj) });
                }
                Some(beta) => {
                    // commit the switch at the right bracket end, whose
                    // state provably selects `beta`; restarting from the
                    // left end would leave the state marginally outside
                    // the new domain, and a slow inward field then flips
                    // the selection straight back — a zero-advance loop
                    let t_ev = t + hi;
                    traj.push_row(t_ev, x_probe.clone(), alpha);
                    n_events += 1;
                    if n_events > cfg.max_events {
                        return Err(SolveError::EventOverflow {
                            time: t_ev,
                            max: cfg.max_events,
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

        // displacement jumps scheduled at this grid time; the row just
        // pushed keeps the pre-jump state (left-continuity)
        while let Some((jt, delta)) = jumps.get(jump_cursor) {
            if *jt > t + 1e-12 {
                break;
            }
            let x_post = &x + delta;
            let after = driver.select(t, &x_post, Side::Right);
            n_events += 1;
            if n_events > cfg.max_events {
                return Err(SolveError::EventOverflow {
                    time: t,
                    max: cfg.max_events,
                    partial: Box::new(traj),
                });
            }
            traj.events.push(Event {
                time: t,
                kind: EventKind::Jump,
                from_index: Some(alpha),
                to_index: after,
                displacement: Some(delta.clone()),
            });
            match after {
                None => {
                    traj.events.push(Event {
                        time: t,
                        kind: EventKind::Exit,
                        from_index: Some(alpha),
                        to_index: None,
                        displacement: None,
                    });
                    return Err(SolveError::OutsideDomain { time: t, partial: Box::new(traj) });
                }
                Some(beta) => {
                    alpha = beta;
                    x = x_post;
                }
            }
            jump_cursor += 1;
        }

        // discontinuous selection moves without state displacement
        while let Some(rt) = reselects.get(reselect_cursor) {
            if *rt > t + 1e-12 {
                break;
            }
            if *rt >= t - 1e-12 {
                match driver.select(t, &x, Side::Right) {
                    None => {
                        traj.events.push(Event {
                            time: t,
                            kind: EventKind::Exit,
                            from_index: Some(alpha),
                            to_index: None,
                            displacement: None,
                        });
                        return Err(SolveError::OutsideDomain {
                            time: t,
                            partial: Box::new(traj),
                        });
                    }
                    Some(beta) if beta != alpha => {
                        n_events += 1;
                        if n_events > cfg.max_events {
                            return Err(SolveError::EventOverflow {
                                time: t,
                                max: cfg.max_events,
                                partial: Box::new(traj),
                            });
                        }
                        traj.events.push(Event {
                            time: t,
                            kind: EventKind::Switch,
                            from_index: Some(alpha),
                            to_index: Some(beta),
                            displacement: None,
                        });
                        alpha = beta;
                    }
                    _ => {}
                }
            }
            reselect_cursor += 1;
        }
    }

    Ok(traj)
}

struct FieldDriver<'a> {
    field: &'a PatchyField,
    ac: &'a AcSignal,
    jump_list: Vec<(f64, Point)>,
}

impl Driver for FieldDriver<'_> {
    fn select(&self, _t: f64, x: &Point, _side: Side) -> Option<PatchIndex> {
        self.field.alpha_star_opt(x)
    }

    fn rhs(&self, idx: PatchIndex, t: f64, x: &Point) -> Point {
        let mut g = self.field.eval_patch(idx, x);
        if !self.ac.is_zero() {
            g += self.ac.rate(t);
        }
        g
    }

    fn jumps(&self) -> Vec<(f64, Point)> {
        self.jump_list.clone()
    }

    fn breaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.ac.breaks(lo, hi)
    }

    fn reselect_times(&self) -> Vec<f64> {
        Vec::new()
    }
}

struct FeedbackDriver<'a> {
    fb: &'a PatchyFeedback,
    zeta: &'a BVSignal,
    d: &'a AcSignal,
}

impl Driver for FeedbackDriver<'_> {
    fn select(&self, t: f64, x: &Point, side: Side) -> Option<PatchIndex> {
        let noise = match side {
            Side::Left => self.zeta.eval_left(t),
            Side::Right => self.zeta.eval_right(t),
        };
        self.fb.alpha_star_opt(&(x + noise))
    }

    fn rhs(&self, idx: PatchIndex, t: f64, x: &Point) -> Point {
        let u = self.fb.control_of(idx).expect("selected index has a control");
        let mut f = self.fb.dynamics().eval(x, u);
        if !self.d.is_zero() {
            f += self.d.rate(t);
        }
        f
    }

    fn jumps(&self) -> Vec<(f64, Point)> {
        Vec::new()
    }

    fn breaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = self.zeta.forced_times(lo, hi);
        out.extend(self.d.breaks(lo, hi));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn reselect_times(&self) -> Vec<f64> {
        let (lo, hi) = self.zeta.span();
        self.zeta.jumps().iter().map(|j| j.time).filter(|t| *t > lo && *t <= hi).collect()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<(), SolveError> {
    if expected != got {
        return Err(SolveError::BadConfig(format!(
            "dimension mismatch: field is {expected}-dimensional, input is {got}-dimensional"
        )));
    }
    Ok(())
}

/// Flow of the selected field from `x0`: `ẏ = g_{α*(y)}(y)`.
pub fn solve_caratheodory(
    field: &PatchyField,
    x0: &Point,
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, SolveError> {
    let w = BVSignal::zero(field.dim(), t0, t_end);
    solve_impulsive(field, &w, x0, t0, t_end, cfg)
}

/// Perturbed flow `y(t) = y(t0) + ∫ g(y) + (w(t) − w(t0))` for a
/// left-continuous BV input `w`: its density enters the right-hand side,
/// its jumps displace the state at their exact times.
pub fn solve_impulsive(
    field: &PatchyField,
    w: &BVSignal,
    y0: &Point,
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, SolveError> {
    check_dim(field.dim(), y0.len())?;
    check_dim(field.dim(), w.dim())?;
    let jump_list = w
        .jumps()
        .iter()
        .filter(|j| j.time > t0 && j.time <= t_end)
        .map(|j| (j.time, j.delta.clone()))
        .collect();
    let driver = FieldDriver { field, ac: w.ac(), jump_list };
    drive(&driver, y0, t0, t_end, cfg)
}

/// Closed loop under measurement noise and outer disturbance:
/// `ẋ = f(x, U(x + ζ(t))) + d(t)`. The recorded indices follow the
/// *measured* state `x + ζ`.
pub fn solve_perturbed_feedback(
    fb: &PatchyFeedback,
    zeta: &BVSignal,
    d: &AcSignal,
    x0: &Point,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, SolveError> {
    check_dim(fb.dim(), x0.len())?;
    check_dim(fb.dim(), zeta.dim())?;
    let t0 = zeta.span().0;
    let driver = FeedbackDriver { fb, zeta, d };
    drive(&driver, x0, t0, t_end, cfg)
}

/// Sample-and-hold loop: at each plan instant τ_i the control is chosen
/// from the measured state `x(τ_i) + e_i` and held until τ_{i+1}. Only the
/// measurements consult the patch domains; between samples the state flows
/// freely under `f(·, u) + d`.
pub fn solve_sampling(
    fb: &PatchyFeedback,
    plan: &SamplingPlan,
    d: &AcSignal,
    x0: &Point,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, SolveError> {
    check_dim(fb.dim(), x0.len())?;
    if !(cfg.dt > 0.0) {
        return Err(SolveError::BadConfig(format!("dt must be positive, got {}", cfg.dt)));
    }
    let (t0, _) = plan.span();
    let mut traj = Trajectory::start(t0, x0.clone());
    let mut x = x0.clone();
    let mut prev_alpha: Option<PatchIndex> = None;

    for (ta, tb, e) in plan.intervals() {
        let measured = &x + e;
        let Some(alpha) = fb.alpha_star_opt(&measured) else {
            traj.events.push(Event {
                time: ta,
                kind: EventKind::Exit,
                from_index: prev_alpha,
                to_index: None,
                displacement: None,
            });
            return Err(SolveError::OutsideDomain { time: ta, partial: Box::new(traj) });
        };
        match prev_alpha {
            None => traj.events.push(Event {
                time: ta,
                kind: EventKind::Start,
                from_index: None,
                to_index: Some(alpha),
                displacement: None,
            }),
            Some(p) if p != alpha => traj.events.push(Event {
                time: ta,
                kind: EventKind::Switch,
                from_index: Some(p),
                to_index: Some(alpha),
                displacement: None,
            }),
            _ => {}
        }
        let u = fb.control_of(alpha).expect("selected index has a control").clone();
        let dyn_ = fb.dynamics();
        let timeline = build_timeline(ta, tb, cfg.dt, &d.breaks(ta, tb));
        let mut t = ta;
        for &next_t in &timeline {
            if next_t <= t {
                continue;
            }
            let h = next_t - t;
            let rhs = |tt: f64, xx: &Point| -> Point {
                let mut f = dyn_.eval(xx, &u);
                if !d.is_zero() {
                    f += d.rate(tt);
                }
                f
            };
            let k1 = rhs(t, &x);
            let k2 = rhs(t + 0.5 * h, &(&x + &k1 * (0.5 * h)));
            let k3 = rhs(t + 0.5 * h, &(&x + &k2 * (0.5 * h)));
            let k4 = rhs(t + h, &(&x + &k3 * h));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            t = next_t;
            traj.push_row(t, x.clone(), alpha);
        }
        prev_alpha = Some(alpha);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use nalgebra::DVector;

    fn v2(x: f64, y: f64) -> Point {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn contraction_flow_matches_the_exponential() {
        let field = fixtures::s1();
        let x0 = v2(1.0, 0.5);
        let cfg = IntegratorConfig::default();
        let traj = solve_caratheodory(&field, &x0, 0.0, 2.0, &cfg).unwrap();
        let mut worst = 0.0f64;
        for (t, y) in traj.times.iter().zip(&traj.states) {
            let exact = &x0 * (-t).exp();
            worst = worst.max((y - exact).norm());
        }
        assert!(worst <= 1e-6, "sup error {worst}");
        assert_eq!(traj.events.len(), 1);
        assert_eq!(traj.active.len(), traj.times.len() - 1);
    }

    #[test]
    fn fourth_order_convergence_between_two_step_sizes() {
        let field = fixtures::s1();
        let x0 = v2(1.0, 0.5);
        let err = |dt: f64| {
            let cfg = IntegratorConfig::default().with_dt(dt);
            let traj = solve_caratheodory(&field, &x0, 0.0, 2.0, &cfg).unwrap();
            let exact = &x0 * (-traj.t_end()).exp();
            (traj.final_state() - exact).norm()
        };
        let (e1, e2) = (err(2e-2), err(1e-2));
        assert!(e1 / e2 >= 12.0, "ratio {} (e1={e1}, e2={e2})", e1 / e2);
    }

    #[test]
    fn switch_time_matches_the_closed_form() {
        // flowing −x from (2.5, 0) reaches the inner ball's boundary
        // |x − (1,0)| = 0.5 at x = 1.5, i.e. t = ln(5/3)
        let field = fixtures::s2();
        let cfg = IntegratorConfig::default();
        let traj = solve_caratheodory(&field, &v2(2.5, 0.0), 0.0, 2.0, &cfg).unwrap();
        let switches = traj.switch_times();
        assert_eq!(switches.len(), 1);
        assert!((switches[0] - (5.0f64 / 3.0).ln()).abs() <= 1e-4, "t = {}", switches[0]);
        // after the switch the state contracts toward (1, 0)
        let last = traj.final_state();
        assert!((last - v2(1.0, 0.0)).norm() < 0.4);
    }

    #[test]
    fn start_outside_every_patch_fails_at_time_zero() {
        let field = fixtures::s1();
        let err = solve_caratheodory(&field, &v2(5.0, 0.0), 0.0, 1.0, &IntegratorConfig::default());
        match err {
            Err(SolveError::OutsideDomain { time, partial }) => {
                assert_eq!(time, 0.0);
                assert_eq!(partial.times.len(), 1);
                assert!(partial.active.is_empty());
            }
            other => panic!("expected OutsideDomain, got {other:?}"),
        }
    }

    #[test]
    fn caratheodory_equals_impulsive_with_zero_signal() {
        let field = fixtures::s2();
        let cfg = IntegratorConfig::default();
        let a = solve_caratheodory(&field, &v2(2.5, 0.0), 0.0, 2.0, &cfg).unwrap();
        let w = BVSignal::zero(2, 0.0, 2.0);
        let b = solve_impulsive(&field, &w, &v2(2.5, 0.0), 0.0, 2.0, &cfg).unwrap();
        assert_eq!(a.times, b.times);
        assert_eq!(a.states, b.states);
        assert_eq!(a.active, b.active);
    }

    #[test]
    fn jump_displaces_the_state_and_keeps_left_continuity() {
        let field = fixtures::s1();
        let x0 = v2(1.0, 0.0);
        let h = 0.1;
        let w = BVSignal::zero(2, 0.0, 2.0).with_jump(1.0, v2(h, 0.0)).unwrap();
        let cfg = IntegratorConfig::default();
        let traj = solve_impulsive(&field, &w, &x0, 0.0, 2.0, &cfg).unwrap();
        // closed form: e^{−t} before the jump, e^{−(t−1)}(e^{−1} + h) after
        let k = traj.times.partition_point(|&s| s < 1.0);
        assert_eq!(traj.times[k], 1.0);
        let pre = &traj.states[k];
        assert!((pre[0] - (-1.0f64).exp()).abs() < 1e-6, "pre-jump state is the left limit");
        let post = traj.state_after(k);
        assert!((post[0] - ((-1.0f64).exp() + h)).abs() < 1e-6);
        let last = traj.final_state();
        let exact = ((-1.0f64).exp() + h) * (-1.0f64).exp();
        assert!((last[0] - exact).abs() < 1e-5, "got {} want {exact}", last[0]);
        assert_eq!(traj.events.iter().filter(|e| e.kind == EventKind::Jump).count(), 1);
    }

    #[test]
    fn jump_out_of_every_domain_reports_exit() {
        let field = fixtures::s1();
        let w = BVSignal::zero(2, 0.0, 1.0).with_jump(0.5, v2(10.0, 0.0)).unwrap();
        let r = solve_impulsive(&field, &w, &v2(1.0, 0.0), 0.0, 1.0, &IntegratorConfig::default());
        match r {
            Err(SolveError::OutsideDomain { time, .. }) => assert_eq!(time, 0.5),
            other => panic!("expected OutsideDomain, got {other:?}"),
        }
    }

    #[test]
    fn segments_split_at_events() {
        let field = fixtures::s2();
        let traj =
            solve_caratheodory(&field, &v2(2.5, 0.0), 0.0, 2.0, &IntegratorConfig::default())
                .unwrap();
        let segs = traj.segments();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].0, 0.0);
        assert_eq!(segs[1].1, 2.0);
        assert_eq!(segs[0].1, segs[1].0);
    }

    #[test]
    fn sample_interpolates_left_values() {
        let field = fixtures::s1();
        let x0 = v2(1.0, 0.0);
        let traj =
            solve_caratheodory(&field, &x0, 0.0, 1.0, &IntegratorConfig::default()).unwrap();
        let y = traj.sample(0.35);
        assert!((y[0] - (-0.35f64).exp()).abs() < 1e-6);
        // exact grid hit returns the stored row
        let y = traj.sample(traj.times[10]);
        assert_eq!(y, traj.states[10]);
    }

    #[test]
    fn feedback_loop_with_zero_noise_matches_its_closed_loop() {
        let fb = fixtures::s2_feedback();
        let field = fb.closed_loop();
        let cfg = IntegratorConfig::default();
        let x0 = v2(2.5, 0.0);
        let zeta = BVSignal::zero(2, 0.0, 2.0);
        let d = AcSignal::zero(2);
        let a = solve_perturbed_feedback(&fb, &zeta, &d, &x0, 2.0, &cfg).unwrap();
        let b = solve_caratheodory(&field, &x0, 0.0, 2.0, &cfg).unwrap();
        assert_eq!(a.times, b.times);
        assert_eq!(a.states, b.states);
        assert_eq!(a.active, b.active);
    }

    #[test]
    fn measurement_jump_can_flip_the_selection() {
        // noise jumps the measured state into the inner patch while the
        // true state stays outside it
        let fb = fixtures::s2_feedback();
        let x0 = v2(2.5, 0.0);
        let zeta = BVSignal::zero(2, 0.0, 0.4)
            .with_jump(0.2, v2(-1.2, 0.0))
            .unwrap();
        let d = AcSignal::zero(2);
        let traj =
            solve_perturbed_feedback(&fb, &zeta, &d, &x0, 0.4, &IntegratorConfig::default())
                .unwrap();
        let sw = traj.switch_times();
        assert_eq!(sw.len(), 1);
        assert_eq!(sw[0], 0.2);
        assert_eq!(traj.active_at(0.3), crate::patchfield::PatchIndex(2));
    }

    #[test]
    fn sampling_holds_the_control_between_instants() {
        // f(x,u) = u with a single patch: the path is exactly piecewise
        // linear with slope k, regardless of dt
        let fb = fixtures::ball_feedback_constant(v2(0.0, 0.0), 2.0, v2(0.3, -0.1));
        let times = vec![0.0, 0.5, 1.0];
        let errors = vec![v2(0.0, 0.0), v2(0.0, 0.0)];
        let plan = SamplingPlan::new(times, errors, 0.6).unwrap();
        let d = AcSignal::zero(2);
        let traj =
            solve_sampling(&fb, &plan, &d, &v2(0.0, 0.0), &IntegratorConfig::default()).unwrap();
        let end = traj.final_state();
        assert!((end - v2(0.3, -0.1)).norm() < 1e-12);
        let mid = traj.sample(0.5);
        assert!((mid - v2(0.15, -0.05)).norm() < 1e-12);
    }

    #[test]
    fn sampling_measured_state_outside_fails_at_that_instant() {
        let fb = fixtures::ball_feedback_constant(v2(0.0, 0.0), 1.0, v2(0.0, 0.0));
        let plan = SamplingPlan::new(
            vec![0.0, 0.5, 1.0],
            vec![v2(0.0, 0.0), v2(5.0, 0.0)],
            0.6,
        )
        .unwrap();
        let d = AcSignal::zero(2);
        let r = solve_sampling(&fb, &plan, &d, &v2(0.0, 0.0), &IntegratorConfig::default());
        match r {
            Err(SolveError::OutsideDomain { time, .. }) => assert_eq!(time, 0.5),
            other => panic!("expected OutsideDomain, got {other:?}"),
        }
    }

    #[test]
    fn event_overflow_guards_chattering() {
        let field = fixtures::s2();
        let cfg = IntegratorConfig { max_events: 0, ..Default::default() };
        let r = solve_caratheodory(&field, &v2(2.5, 0.0), 0.0, 2.0, &cfg);
        assert!(matches!(r, Err(SolveError::EventOverflow { .. })));
    }

    #[test]
    fn forced_times_are_hit_exactly() {
        let field = fixtures::s1();
        let w = BVSignal::zero(2, 0.0, 1.0).with_jump(0.123456789, v2(0.01, 0.0)).unwrap();
        let traj =
            solve_impulsive(&field, &w, &v2(1.0, 0.0), 0.0, 1.0, &IntegratorConfig::default())
                .unwrap();
        assert!(traj.times.iter().any(|&t| t == 0.123456789));
    }
}
