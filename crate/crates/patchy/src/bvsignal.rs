//! Left-continuous bounded-variation signals.
//!
//! A [`BVSignal`] is a finite sum of jumps and an absolutely continuous part
//! given by piecewise-smooth densities. The pointwise convention is the
//! left-continuous representative: `w(t) = w(t⁻)`, so a jump at time `s`
//! affects values on `(s, ·]` only, and total variation over `(a, b]` counts
//! exactly the jumps in `(a, b]`. Singular-continuous parts (Cantor-type)
//! are not representable and out of scope.

use nalgebra::DVector;

use crate::geometry::Point;

#[derive(Debug, thiserror::Error)]
pub enum SignalError {
    #[error("jump at t = {0} lies outside the signal span")]
    JumpOutsideSpan(f64),
    #[error("jump times must be strictly increasing")]
    UnorderedJumps,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),
    #[error("invalid piece span [{0}, {1}]")]
    BadPieceSpan(f64, f64),
}

/// Density shapes for the absolutely continuous part. `Grid*` kinds carry
/// their own node times; the others are smooth on the whole piece.
#[derive(Clone, Debug)]
pub enum AcKind {
    Constant { rate: DVector<f64> },
    /// rate interpolates linearly from `rate0` at the piece start to `rate1`
    /// at the piece end.
    Linear { rate0: DVector<f64>, rate1: DVector<f64> },
    /// rate(t) = amp · sin(omega·t + phase), t absolute.
    Sinusoid { amp: DVector<f64>, omega: f64, phase: f64 },
    /// piecewise-constant: `rates[i]` on (times[i], times[i+1]];
    /// times.len() == rates.len() + 1.
    GridConstant { times: Vec<f64>, rates: Vec<DVector<f64>> },
    /// piecewise-linear interpolation of `values` at `times` (equal lengths).
    GridLinear { times: Vec<f64>, values: Vec<DVector<f64>> },
}

#[derive(Clone, Debug)]
pub struct AcPiece {
    pub t0: f64,
    pub t1: f64,
    pub kind: AcKind,
}

impl AcPiece {
    pub fn new(t0: f64, t1: f64, kind: AcKind) -> Result<Self, SignalError> {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(SignalError::BadPieceSpan(t0, t1));
        }
        if let AcKind::GridConstant { times, rates } = &kind {
            if times.len() != rates.len() + 1 {
                return Err(SignalError::InvalidPlan("grid-constant shape mismatch".into()));
            }
        }
        if let AcKind::GridLinear { times, values } = &kind {
            if times.len() != values.len() || times.len() < 2 {
                return Err(SignalError::InvalidPlan("grid-linear shape mismatch".into()));
            }
        }
        Ok(AcPiece { t0, t1, kind })
    }

    pub fn rate(&self, t: f64) -> DVector<f64> {
        let t = t.clamp(self.t0, self.t1);
        match &self.kind {
            AcKind::Constant { rate } => rate.clone(),
            AcKind::Linear { rate0, rate1 } => {
                let s = (t - self.t0) / (self.t1 - self.t0);
                rate0 * (1.0 - s) + rate1 * s
            }
            AcKind::Sinusoid { amp, omega, phase } => amp * (omega * t + phase).sin(),
            AcKind::GridConstant { times, rates } => {
                // rate on (times[i], times[i+1]]
                let i = match times.binary_search_by(|v| v.total_cmp(&t)) {
                    Ok(i) => i.saturating_sub(1),
                    Err(i) => i.saturating_sub(1),
                };
                rates[i.min(rates.len() - 1)].clone()
            }
            AcKind::GridLinear { times, values } => {
                let i = match times.binary_search_by(|v| v.total_cmp(&t)) {
                    Ok(i) => return values[i].clone(),
                    Err(i) => i.clamp(1, times.len() - 1) - 1,
                };
                let (ta, tb) = (times[i], times[i + 1]);
                if tb <= ta {
                    return values[i].clone();
                }
                let s = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
                &values[i] * (1.0 - s) + &values[i + 1] * s
            }
        }
    }

    /// Interior kink times (where the density is not smooth).
    fn breaks(&self) -> Vec<f64> {
        match &self.kind {
            AcKind::GridConstant { times, .. } | AcKind::GridLinear { times, .. } => times
                .iter()
                .cloned()
                .filter(|t| *t > self.t0 && *t < self.t1)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Exact ∫ rate over `[lo, hi] ∩ [t0, t1]`.
    pub fn integral(&self, lo: f64, hi: f64) -> DVector<f64> {
        let lo = lo.max(self.t0);
        let hi = hi.min(self.t1);
        let dim = self.rate(self.t0).len();
        if hi <= lo {
            return DVector::zeros(dim);
        }
        match &self.kind {
            AcKind::Constant { rate } => rate * (hi - lo),
            AcKind::Linear { .. } => {
                // trapezoid is exact for a linear density
                (self.rate(lo) + self.rate(hi)) * (0.5 * (hi - lo))
            }
            AcKind::Sinusoid { amp, omega, phase } => {
                if omega.abs() < 1e-300 {
                    amp * (phase.sin() * (hi - lo))
                } else {
                    amp * (((omega * lo + phase).cos() - (omega * hi + phase).cos()) / omega)
                }
            }
            AcKind::GridConstant { times, rates } => {
                let mut acc = DVector::zeros(dim);
                for i in 0..rates.len() {
                    let a = times[i].max(lo);
                    let b = times[i + 1].min(hi);
                    if b > a {
                        acc += &rates[i] * (b - a);
                    }
                }
                acc
            }
            AcKind::GridLinear { times, .. } => {
                let mut acc = DVector::zeros(dim);
                let mut nodes: Vec<f64> = vec![lo];
                nodes.extend(times.iter().cloned().filter(|t| *t > lo && *t < hi));
                nodes.push(hi);
                for pair in nodes.windows(2) {
                    acc += (self.rate(pair[0]) + self.rate(pair[1])) * (0.5 * (pair[1] - pair[0]));
                }
                acc
            }
        }
    }
}

/// Sum of (possibly overlapping) density pieces; the total rate at `t` is the
/// sum of all active pieces.
#[derive(Clone, Debug)]
pub struct AcSignal {
    dim: usize,
    pieces: Vec<AcPiece>,
}

impl AcSignal {
    pub fn zero(dim: usize) -> Self {
        AcSignal { dim, pieces: Vec::new() }
    }

    pub fn new(dim: usize, pieces: Vec<AcPiece>) -> Result<Self, SignalError> {
        for p in &pieces {
            let got = p.rate(p.t0).len();
            if got != dim {
                return Err(SignalError::Dimension { expected: dim, got });
            }
        }
        Ok(AcSignal { dim, pieces })
    }

    pub fn constant(rate: DVector<f64>, t0: f64, t1: f64) -> Result<Self, SignalError> {
        let dim = rate.len();
        Ok(AcSignal { dim, pieces: vec![AcPiece::new(t0, t1, AcKind::Constant { rate })?] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AcPiece] {
        &self.pieces
    }

    pub fn push(&mut self, piece: AcPiece) -> Result<(), SignalError> {
        let got = piece.rate(piece.t0).len();
        if got != self.dim {
            return Err(SignalError::Dimension { expected: self.dim, got });
        }
        self.pieces.push(piece);
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn rate(&self, t: f64) -> DVector<f64> {
        let mut acc = DVector::zeros(self.dim);
        for p in &self.pieces {
            if t >= p.t0 && t <= p.t1 {
                acc += p.rate(t);
            }
        }
        acc
    }

    pub fn integral(&self, lo: f64, hi: f64) -> DVector<f64> {
        let mut acc = DVector::zeros(self.dim);
        for p in &self.pieces {
            acc += p.integral(lo, hi);
        }
        acc
    }

    /// All density kinks in `[lo, hi]`: piece endpoints and grid nodes.
    /// The integrators force grid points here.
    pub fn breaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for p in &self.pieces {
            out.push(p.t0);
            out.push(p.t1);
            out.extend(p.breaks());
        }
        out.retain(|t| *t > lo && *t < hi);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// ∫ |rate| over [lo, hi]. Exact for non-overlapping constant-type
    /// pieces; adaptive Simpson (tol 1e-10) on the smooth spans otherwise.
    pub fn integral_abs(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo || self.pieces.is_empty() {
            return 0.0;
        }
        let disjoint = {
            let mut spans: Vec<(f64, f64)> = self.pieces.iter().map(|p| (p.t0, p.t1)).collect();
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            spans.windows(2).all(|w| w[0].1 <= w[1].0 + 1e-15)
        };
        if disjoint {
            return self.pieces.iter().map(|p| piece_integral_abs(p, lo, hi)).sum();
        }
        // overlapping pieces: integrate |Σ rates| between all breaks
        let mut nodes = vec![lo];
        nodes.extend(self.breaks(lo, hi));
        nodes.push(hi);
        let mut acc = 0.0;
        for pair in nodes.windows(2) {
            if pair[1] > pair[0] {
                acc += adaptive_simpson(&|t| self.rate(t).norm(), pair[0], pair[1], 1e-10);
            }
        }
        acc
    }

    /// Sup of |rate| over [lo, hi], by dense sampling between kinks.
    pub fn sup_norm(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo || self.pieces.is_empty() {
            return 0.0;
        }
        let mut nodes = vec![lo];
        nodes.extend(self.breaks(lo, hi));
        nodes.push(hi);
        let mut best: f64 = 0.0;
        for pair in nodes.windows(2) {
            for k in 0..=64 {
                let t = pair[0] + (pair[1] - pair[0]) * k as f64 / 64.0;
                best = best.max(self.rate(t).norm());
            }
        }
        best
    }
}

fn piece_integral_abs(p: &AcPiece, lo: f64, hi: f64) -> f64 {
    let lo = lo.max(p.t0);
    let hi = hi.min(p.t1);
    if hi <= lo {
        return 0.0;
    }
    match &p.kind {
        AcKind::Constant { rate } => rate.norm() * (hi - lo),
        AcKind::GridConstant { times, rates } => {
            let mut acc = 0.0;
            for i in 0..rates.len() {
                let a = times[i].max(lo);
                let b = times[i + 1].min(hi);
                if b > a {
                    acc += rates[i].norm() * (b - a);
                }
            }
            acc
        }
        _ => {
            let mut nodes = vec![lo];
            nodes.extend(p.breaks().into_iter().filter(|t| *t > lo && *t < hi));
            nodes.push(hi);
            let mut acc = 0.0;
            for pair in nodes.windows(2) {
                acc += adaptive_simpson(&|t| p.rate(t).norm(), pair[0], pair[1], 1e-10);
            }
            acc
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
        }
    }
    if hi <= lo {
        return 0.0;
    }
    let m = 0.5 * (lo + hi);
    let (fa, fm, fb) = (f(lo), f(m), f(hi));
    recurse(f, lo, hi, fa, fm, fb, simpson(fa, fm, fb, hi - lo), tol, 48)
}

#[derive(Clone, Debug)]
pub struct Jump {
    pub time: f64,
    pub delta: DVector<f64>,
}

/// Left-continuous BV signal: `w(t) = origin + Σ_{s<t} Δw(s) + ∫_{t₀}^t ẇ_ac`.
#[derive(Clone, Debug)]
pub struct BVSignal {
    dim: usize,
    span: (f64, f64),
    origin_value: DVector<f64>,
    jumps: Vec<Jump>,
    ac: AcSignal,
}

impl BVSignal {
    pub fn zero(dim: usize, t0: f64, t_end: f64) -> Self {
        BVSignal {
            dim,
            span: (t0, t_end),
            origin_value: DVector::zeros(dim),
            jumps: Vec::new(),
            ac: AcSignal::zero(dim),
        }
    }

    pub fn new(origin_value: DVector<f64>, t0: f64, t_end: f64) -> Self {
        let dim = origin_value.len();
        BVSignal { dim, span: (t0, t_end), origin_value, jumps: Vec::new(), ac: AcSignal::zero(dim) }
    }

    /// Add a jump; times must land in `(t₀, T]` and be new.
    pub fn with_jump(mut self, time: f64, delta: DVector<f64>) -> Result<Self, SignalError> {
        if delta.len() != self.dim {
            return Err(SignalError::Dimension { expected: self.dim, got: delta.len() });
        }
        if !(time > self.span.0 && time <= self.span.1) {
            return Err(SignalError::JumpOutsideSpan(time));
        }
        let pos = self.jumps.partition_point(|j| j.time < time);
        if self.jumps.get(pos).is_some_and(|j| j.time == time) {
            return Err(SignalError::UnorderedJumps);
        }
        self.jumps.insert(pos, Jump { time, delta });
        Ok(self)
    }

    pub fn with_ac_piece(mut self, piece: AcPiece) -> Result<Self, SignalError> {
        if piece.t0 < self.span.0 - 1e-12 || piece.t1 > self.span.1 + 1e-12 {
            return Err(SignalError::BadPieceSpan(piece.t0, piece.t1));
        }
        self.ac.push(piece)?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn ac(&self) -> &AcSignal {
        &self.ac
    }

    pub fn jump_at(&self, t: f64) -> Option<&Jump> {
        self.jumps.iter().find(|j| j.time == t)
    }

    pub fn is_zero(&self) -> bool {
        self.jumps.is_empty() && self.ac.is_zero() && self.origin_value.iter().all(|v| *v == 0.0)
    }

    /// Scale the whole signal (jumps, densities, origin) by a factor;
    /// total variation scales by |factor|.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.origin_value *= factor;
        for j in &mut out.jumps {
            j.delta *= factor;
        }
        for p in &mut out.ac.pieces {
            p.kind = match p.kind.clone() {
                AcKind::Constant { rate } => AcKind::Constant { rate: rate * factor },
                AcKind::Linear { rate0, rate1 } => {
                    AcKind::Linear { rate0: rate0 * factor, rate1: rate1 * factor }
                }
                AcKind::Sinusoid { amp, omega, phase } => {
                    AcKind::Sinusoid { amp: amp * factor, omega, phase }
                }
                AcKind::GridConstant { times, rates } => AcKind::GridConstant {
                    times,
                    rates: rates.into_iter().map(|r| r * factor).collect(),
                },
                AcKind::GridLinear { times, values } => AcKind::GridLinear {
                    times,
                    values: values.into_iter().map(|v| v * factor).collect(),
                },
            };
        }
        out
    }

    /// `w(t⁻)`: jumps strictly before `t` count.
    pub fn eval_left(&self, t: f64) -> DVector<f64> {
        let mut v = self.origin_value.clone() + self.ac.integral(self.span.0, t);
        for j in &self.jumps {
            if j.time < t {
                v += &j.delta;
            }
        }
        v
    }

    /// `w(t⁺)`: jumps at `t` included.
    pub fn eval_right(&self, t: f64) -> DVector<f64> {
        let mut v = self.origin_value.clone() + self.ac.integral(self.span.0, t);
        for j in &self.jumps {
            if j.time <= t {
                v += &j.delta;
            }
        }
        v
    }

    /// Total variation over `(lo, hi]`: jump norms for jump times in
    /// `(lo, hi]` plus ∫|ẇ_ac|.
    pub fn total_variation(&self, lo: f64, hi: f64) -> f64 {
        let mut tv = self.ac.integral_abs(lo, hi);
        for j in &self.jumps {
            if j.time > lo && j.time <= hi {
                tv += j.delta.norm();
            }
        }
        tv
    }

    pub fn total_variation_span(&self) -> f64 {
        self.total_variation(self.span.0, self.span.1)
    }

    /// Times the integrators must not step across: jumps and density kinks.
    pub fn forced_times(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self.jumps.iter().map(|j| j.time).collect();
        out.extend(self.ac.breaks(lo, hi));
        out.retain(|t| *t > lo && *t < hi);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Inner/outer reduction: `w(t) = e₁(t) + ∫_{t₀}^t e₂(s) ds`. The result
/// keeps e₁'s jumps and adds e₂ to the density, so
/// TV{w} ≤ TV{e₁} + ∫|e₂|.
pub fn compose_inner_outer(e1: &BVSignal, e2: &AcSignal) -> Result<BVSignal, SignalError> {
    if e2.dim() != e1.dim() {
        return Err(SignalError::Dimension { expected: e1.dim(), got: e2.dim() });
    }
    let mut w = e1.clone();
    for p in e2.pieces() {
        w = w.with_ac_piece(p.clone())?;
    }
    Ok(w)
}

/// Sample-and-hold time partition with per-interval measurement errors:
/// `errors[i]` applies on `(times[i], times[i+1]]`.
#[derive(Clone, Debug)]
pub struct SamplingPlan {
    times: Vec<f64>,
    errors: Vec<DVector<f64>>,
    delta: f64,
}

impl SamplingPlan {
    /// Enforces the admissibility constraint δ/2 ≤ τ_{i+1} − τ_i ≤ δ.
    pub fn new(times: Vec<f64>, errors: Vec<DVector<f64>>, delta: f64) -> Result<Self, SignalError> {
        if times.len() < 2 {
            return Err(SignalError::InvalidPlan("need at least two partition times".into()));
        }
        if errors.len() != times.len() - 1 {
            return Err(SignalError::InvalidPlan(format!(
                "expected {} error vectors, got {}",
                times.len() - 1,
                errors.len()
            )));
        }
        if delta <= 0.0 {
            return Err(SignalError::InvalidPlan("delta must be positive".into()));
        }
        let slack = 1e-9 * delta;
        for pair in times.windows(2) {
            let step = pair[1] - pair[0];
            if step < 0.5 * delta - slack || step > delta + slack {
                return Err(SignalError::InvalidPlan(format!(
                    "step {} at t = {} violates [δ/2, δ] = [{}, {}]",
                    step,
                    pair[0],
                    0.5 * delta,
                    delta
                )));
            }
        }
        Ok(SamplingPlan { times, errors, delta })
    }

    /// Seeded admissible partition of [t0, t_end]: steps δ·(0.5 + 0.5u) with
    /// u uniform, end adjusted so the last steps stay within [δ/2, δ].
    pub fn seeded_times(t0: f64, t_end: f64, delta: f64, seed: u64) -> Result<Vec<f64>, SignalError> {
        use rand::{Rng, SeedableRng};
        if t_end - t0 < 0.5 * delta {
            return Err(SignalError::InvalidPlan("span shorter than δ/2".into()));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut ts = vec![t0];
        loop {
            let t = *ts.last().unwrap();
            let remaining = t_end - t;
            if remaining <= delta + 1e-12 {
                if remaining >= 0.5 * delta - 1e-12 {
                    ts.push(t_end);
                } else {
                    // fold the short tail into the previous step
                    let prev = ts[ts.len() - 2];
                    let span = t_end - prev;
                    ts.pop();
                    if span <= delta {
                        ts.push(t_end);
                    } else {
                        ts.push(prev + 0.5 * span);
                        ts.push(t_end);
                    }
                }
                return Ok(ts);
            }
            let u: f64 = rng.random();
            ts.push(t + delta * (0.5 + 0.5 * u));
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn errors(&self) -> &[DVector<f64>] {
        &self.errors
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn max_error_norm(&self) -> f64 {
        self.errors.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// (τ_i, τ_{i+1}, e_i) triples.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, &DVector<f64>)> {
        self.times.windows(2).zip(&self.errors).map(|(w, e)| (w[0], w[1], e))
    }
}

/// The piecewise-constant measurement signal ζ(t) = e_i on (τ_i, τ_{i+1}],
/// with ζ(τ₀) = e₀. Its variation is the sum of interior increments, which
/// stays within the 4·k̄·T budget for admissible plans.
pub fn from_sampling_errors(plan: &SamplingPlan) -> BVSignal {
    let (t0, t_end) = plan.span();
    let mut w = BVSignal::new(plan.errors()[0].clone(), t0, t_end);
    for i in 1..plan.errors().len() {
        let delta = &plan.errors()[i] - &plan.errors()[i - 1];
        if delta.norm() > 0.0 {
            w = w
                .with_jump(plan.times()[i], delta)
                .expect("plan times are strictly increasing and interior");
        }
    }
    w
}

/// The perturbation that makes the measured closed loop an impulsive run of
/// the nominal field: along a trajectory `y` of the measured loop,
/// `w(t) = ζ(t) + ∫ (h(y, ζ) + d)` with
/// `h(y, z) = f(y − z, U(y)) − f(y, U(y))`.
///
/// The density is tabulated on the trajectory grid segment-by-segment
/// (between events) and interpolated linearly, so the reconstruction error
/// is O(dt²) on smooth stretches.
pub fn build_equivalent_w(
    y: &crate::integrate::Trajectory,
    zeta: &BVSignal,
    d: &AcSignal,
    fb: &crate::patchfield::PatchyFeedback,
) -> Result<BVSignal, crate::patchfield::FieldError> {
    let t0 = y.times[0];
    let t_end = *y.times.last().unwrap();
    let mut w = BVSignal::new(zeta.eval_right(t0), t0, t_end);
    for j in zeta.jumps() {
        if j.time > t0 && j.time <= t_end {
            w = w.with_jump(j.time, j.delta.clone()).expect("jump times from a valid signal");
        }
    }
    for p in zeta.ac().pieces() {
        w = w.with_ac_piece(p.clone()).expect("piece spans from a valid signal");
    }

    let h = |state: &Point, z: &DVector<f64>| -> Result<Point, crate::patchfield::FieldError> {
        let u = fb.control_at(state)?;
        let shifted = state - z;
        Ok(fb.dynamics().eval(&shifted, u) - fb.dynamics().eval(state, u))
    };

    // one grid-linear density piece per inter-event segment
    for (lo, hi) in y.segments() {
        if hi <= lo + 1e-15 {
            continue;
        }
        let idx_lo = y.times.partition_point(|t| *t < lo);
        let idx_hi = y.times.partition_point(|t| *t <= hi) - 1;
        let mut times = Vec::with_capacity(idx_hi - idx_lo + 1);
        let mut values = Vec::with_capacity(idx_hi - idx_lo + 1);
        for k in idx_lo..=idx_hi {
            let t = y.times[k];
            // right state/value at the segment start, left elsewhere
            let (state, z) = if k == idx_lo {
                (y.state_after(k), zeta.eval_right(t))
            } else {
                (y.states[k].clone(), zeta.eval_left(t))
            };
            values.push(h(&state, &z)? + d.rate(t));
            times.push(t);
        }
        if times.len() == 1 {
            continue;
        }
        let piece = AcPiece::new(lo, hi, AcKind::GridLinear { times, values })
            .expect("segment bounds are increasing");
        w = w.with_ac_piece(piece).expect("segment lies inside the trajectory span");
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn tv_of_single_jump() {
        let w = BVSignal::zero(2, 0.0, 2.0).with_jump(1.0, v2(0.1, 0.0)).unwrap();
        assert_relative_eq!(w.total_variation(0.0, 2.0), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn tv_of_constant_density() {
        let w = BVSignal::zero(2, 0.0, 3.0)
            .with_ac_piece(AcPiece::new(0.0, 3.0, AcKind::Constant { rate: v2(0.05, 0.0) }).unwrap())
            .unwrap();
        assert_relative_eq!(w.total_variation(0.0, 3.0), 0.15, epsilon = 1e-12);
    }

    #[test]
    fn tv_jump_plus_density() {
        let w = BVSignal::zero(2, 0.0, 2.0)
            .with_jump(1.0, v2(0.1, 0.0))
            .unwrap()
            .with_ac_piece(AcPiece::new(0.0, 2.0, AcKind::Constant { rate: v2(0.05, 0.0) }).unwrap())
            .unwrap();
        assert_relative_eq!(w.total_variation(0.0, 2.0), 0.2, epsilon = 1e-10);
    }

    #[test]
    fn eval_left_excludes_the_jump() {
        let w = BVSignal::zero(2, 0.0, 2.0).with_jump(1.0, v2(0.1, 0.0)).unwrap();
        assert_eq!(w.eval_left(1.0), v2(0.0, 0.0));
        assert_eq!(w.eval_right(1.0), v2(0.1, 0.0));
        assert_eq!(w.eval_left(1.5), v2(0.1, 0.0));
        assert_eq!(w.eval_left(0.0), v2(0.0, 0.0));
    }

    #[test]
    fn left_continuity_identity_at_jumps() {
        let w = BVSignal::zero(2, 0.0, 2.0)
            .with_jump(0.7, v2(0.03, -0.01))
            .unwrap()
            .with_ac_piece(AcPiece::new(0.0, 2.0, AcKind::Sinusoid {
                amp: v2(0.1, 0.0),
                omega: 3.0,
                phase: 0.2,
            })
            .unwrap())
            .unwrap();
        let j = w.jump_at(0.7).unwrap();
        let lhs = w.eval_left(0.7) + &j.delta;
        let rhs = w.eval_left(0.7 + 1e-9);
        assert!((lhs - rhs).norm() < 1e-8);
        assert!((w.eval_right(0.7) - (w.eval_left(0.7) + &w.jump_at(0.7).unwrap().delta)).norm() == 0.0);
    }

    /// Fine-partition supremum approximates total variation from below.
    #[test]
    fn fine_partition_oracle() {
        let w = BVSignal::zero(1, 0.0, 2.0)
            .with_jump(0.5, DVector::from_vec(vec![0.2]))
            .unwrap()
            .with_jump(1.25, DVector::from_vec(vec![-0.1]))
            .unwrap()
            .with_ac_piece(
                AcPiece::new(0.0, 2.0, AcKind::Sinusoid {
                    amp: DVector::from_vec(vec![0.3]),
                    omega: 4.0,
                    phase: 0.0,
                })
                .unwrap(),
            )
            .unwrap();
        let tv = w.total_variation(0.0, 2.0);
        let mut parts: Vec<f64> = (0..=20_000).map(|k| 2.0 * k as f64 / 20_000.0).collect();
        for s in [0.5, 1.25] {
            parts.push(s);
            parts.push(s + 1e-12);
        }
        parts.sort_by(f64::total_cmp);
        parts.dedup();
        let mut sum = 0.0;
        let mut prev = w.eval_left(parts[0]);
        for t in &parts[1..] {
            let cur = w.eval_left(*t);
            sum += (&cur - &prev).norm();
            prev = cur;
        }
        assert!(sum <= tv + 1e-9, "partition sum {sum} exceeds TV {tv}");
        assert!(sum >= tv - 1e-3, "partition sum {sum} far below TV {tv}");
    }

    #[test]
    fn tv_additivity_at_interior_point() {
        let w = BVSignal::zero(1, 0.0, 2.0)
            .with_jump(0.8, DVector::from_vec(vec![0.2]))
            .unwrap()
            .with_ac_piece(
                AcPiece::new(0.2, 1.7, AcKind::Linear {
                    rate0: DVector::from_vec(vec![0.1]),
                    rate1: DVector::from_vec(vec![-0.2]),
                })
                .unwrap(),
            )
            .unwrap();
        for b in [0.2, 0.5, 0.8, 1.3] {
            let lhs = w.total_variation(0.0, b) + w.total_variation(b, 2.0);
            let rhs = w.total_variation(0.0, 2.0);
            assert_relative_eq!(lhs, rhs, epsilon = 1e-9);
        }
    }

    #[test]
    fn compose_keeps_jumps_and_adds_density() {
        let e1 = BVSignal::zero(2, 0.0, 2.0).with_jump(1.0, v2(0.05, 0.0)).unwrap();
        let e2 = AcSignal::constant(v2(0.0, 0.02), 0.0, 2.0).unwrap();
        let w = compose_inner_outer(&e1, &e2).unwrap();
        assert_relative_eq!(w.total_variation(0.0, 2.0), 0.09, epsilon = 1e-10);
        assert_eq!(w.jumps().len(), 1);
        // e2 = 0 leaves e1 unchanged
        let w0 = compose_inner_outer(&e1, &AcSignal::zero(2)).unwrap();
        assert_eq!(w0.eval_left(1.7), e1.eval_left(1.7));
        assert_relative_eq!(
            w0.total_variation(0.0, 2.0),
            e1.total_variation(0.0, 2.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn sampling_errors_to_signal() {
        let times = vec![0.0, 0.1, 0.2, 0.3];
        let errors = vec![v2(0.01, 0.0), v2(-0.01, 0.0), v2(-0.01, 0.0)];
        let plan = SamplingPlan::new(times, errors, 0.1).unwrap();
        let zeta = from_sampling_errors(&plan);
        assert_eq!(zeta.eval_left(0.05), v2(0.01, 0.0));
        assert_eq!(zeta.eval_left(0.1), v2(0.01, 0.0));
        assert_eq!(zeta.eval_left(0.15), v2(-0.01, 0.0));
        assert_relative_eq!(zeta.total_variation(0.0, 0.3), 0.02, epsilon = 1e-15);
    }

    #[test]
    fn alternating_errors_respect_the_variation_budget() {
        // worst-case alternating errors at the k̄δ bound: TV ≤ 4·k̄·T
        let (delta, k_bar, t_end) = (0.1, 0.5, 1.0);
        let times = SamplingPlan::seeded_times(0.0, t_end, delta, 42).unwrap();
        let m = times.len() - 1;
        let errors: Vec<_> = (0..m)
            .map(|i| v2(if i % 2 == 0 { k_bar * delta } else { -k_bar * delta }, 0.0))
            .collect();
        let plan = SamplingPlan::new(times, errors, delta).unwrap();
        let zeta = from_sampling_errors(&plan);
        assert!(zeta.total_variation(0.0, t_end) <= 4.0 * k_bar * t_end + 1e-12);
    }

    #[test]
    fn rejects_inadmissible_partition() {
        let times = vec![0.0, 0.3, 0.35]; // second step too short for δ=0.2... first too long
        assert!(SamplingPlan::new(times, vec![v2(0.0, 0.0); 2], 0.2).is_err());
    }

    #[test]
    fn scaled_signal_scales_variation() {
        let w = BVSignal::zero(1, 0.0, 1.0)
            .with_jump(0.6, DVector::from_vec(vec![0.5]))
            .unwrap()
            .with_ac_piece(
                AcPiece::new(0.0, 1.0, AcKind::Constant { rate: DVector::from_vec(vec![0.5]) })
                    .unwrap(),
            )
            .unwrap();
        assert_relative_eq!(w.total_variation_span(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.scaled(0.01).total_variation_span(), 0.01, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn seeded_partitions_are_admissible(seed in 0u64..500, delta in 0.01f64..0.5, t_end in 1.0f64..5.0) {
            let times = SamplingPlan::seeded_times(0.0, t_end, delta, seed).unwrap();
            prop_assert_eq!(*times.last().unwrap(), t_end);
            for w in times.windows(2) {
                let step = w[1] - w[0];
                prop_assert!(step >= 0.5*delta - 1e-9, "step {} < δ/2 {}", step, 0.5*delta);
                prop_assert!(step <= delta + 1e-9, "step {} > δ {}", step, delta);
            }
        }

        #[test]
        fn tv_additivity_random(split in 0.05f64..1.95, jt in 0.1f64..1.9, jx in -0.5f64..0.5) {
            let w = BVSignal::zero(1, 0.0, 2.0)
                .with_jump(jt, DVector::from_vec(vec![jx])).unwrap()
                .with_ac_piece(AcPiece::new(0.0, 2.0, AcKind::Sinusoid {
                    amp: DVector::from_vec(vec![0.2]), omega: 2.5, phase: 1.0 }).unwrap()).unwrap();
            let lhs = w.total_variation(0.0, split) + w.total_variation(split, 2.0);
            let rhs = w.total_variation(0.0, 2.0);
            prop_assert!((lhs - rhs).abs() < 1e-8);
        }
    }
}
