//! Smooth implicit domains: `Ω = { x : ψ(x) < 0 }`.
//!
//! Every domain carries a level function `ψ`, its gradient, a bounding ball
//! and a collar width. The signed distance `φ` used throughout the crate is
//! positive *inside* (depth) and negative outside, so `φ = dist(x, ∂Ω)` on
//! `Ω` and `φ = -dist(x, ∂Ω)` elsewhere. Balls and round cones are exact
//! distance fields; ellipsoids, smoothed intersections and custom level sets
//! go through a Newton foot-point projection with a ray-sweep fallback.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lowdisc;

pub type Point = DVector<f64>;

/// Residual allowed on `ψ` after projecting a point to the boundary.
const SURFACE_TOL: f64 = 1e-12;
/// Gradient norms below this make normals meaningless.
const GRAD_FLOOR: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate boundary: |∇ψ| = {grad_norm:.3e} at a queried point")]
    DegenerateBoundary { grad_norm: f64 },
    #[error("numerical failure in {op}: {detail}")]
    NumericalFailure { op: &'static str, detail: String },
    #[error("invalid domain construction: {0}")]
    Construction(String),
}

#[derive(Clone)]
enum Shape {
    Ball {
        center: Point,
        radius: f64,
    },
    Ellipsoid {
        center: Point,
        semi_axes: Vec<f64>,
    },
    /// Convex hull of the balls `B(a, r_a)` and `B(b, r_b)`; an exact
    /// distance field, smooth away from the skeleton segment.
    RoundCone {
        a: Point,
        b: Point,
        r_a: f64,
        r_b: f64,
    },
    /// Soft intersection: `ψ = (1/s)·log Σ exp(s·ψ_k)`. Approximate — the
    /// softmax over-estimates the max, so the domain is slightly smaller
    /// than the true intersection.
    Intersection {
        parts: Vec<SmoothDomain>,
        sharpness: f64,
    },
    Custom {
        level: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
        grad: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
    },
}

/// An open domain `{ψ < 0}` with enough metric structure for collar queries.
#[derive(Clone)]
pub struct SmoothDomain {
    shape: Shape,
    dim: usize,
    center: Point,
    bounding_radius: f64,
    collar_width: f64,
}

impl fmt::Debug for SmoothDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.shape {
            Shape::Ball { .. } => "ball",
            Shape::Ellipsoid { .. } => "ellipsoid",
            Shape::RoundCone { .. } => "round_cone",
            Shape::Intersection { .. } => "intersection",
            Shape::Custom { .. } => "custom",
        };
        f.debug_struct("SmoothDomain")
            .field("kind", &kind)
            .field("dim", &self.dim)
            .field("bounding_radius", &self.bounding_radius)
            .field("collar_width", &self.collar_width)
            .finish()
    }
}

impl SmoothDomain {
    pub fn ball(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(GeometryError::Construction(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        let dim = center.len();
        Ok(SmoothDomain {
            shape: Shape::Ball { center: center.clone(), radius },
            dim,
            center,
            bounding_radius: radius,
            collar_width: 0.1 * radius,
        })
    }

    pub fn ellipsoid(center: Point, semi_axes: Vec<f64>) -> Result<Self, GeometryError> {
        if semi_axes.len() != center.len() {
            return Err(GeometryError::Construction(
                "semi-axis count must match dimension".into(),
            ));
        }
        if semi_axes.iter().any(|a| *a <= 0.0 || !a.is_finite()) {
            return Err(GeometryError::Construction("semi-axes must be positive".into()));
        }
        let dim = center.len();
        let r = semi_axes.iter().cloned().fold(0.0, f64::max);
        Ok(SmoothDomain {
            shape: Shape::Ellipsoid { center: center.clone(), semi_axes },
            dim,
            center,
            bounding_radius: r,
            collar_width: 0.1 * r,
        })
    }

    pub fn round_cone(a: Point, b: Point, r_a: f64, r_b: f64) -> Result<Self, GeometryError> {
        if a.len() != b.len() {
            return Err(GeometryError::Construction("endpoint dimensions differ".into()));
        }
        if r_a <= 0.0 || r_b <= 0.0 {
            return Err(GeometryError::Construction("cone radii must be positive".into()));
        }
        let ba = &b - &a;
        let l = ba.norm();
        if (r_a - r_b).abs() >= l {
            return Err(GeometryError::Construction(
                "one end ball swallows the other; use a ball instead".into(),
            ));
        }
        let center = (&a + &b).scale(0.5);
        let bounding_radius = 0.5 * l + r_a.max(r_b);
        let dim = a.len();
        Ok(SmoothDomain {
            shape: Shape::RoundCone { a, b, r_a, r_b },
            dim,
            center,
            bounding_radius,
            collar_width: 0.1 * r_a.min(r_b),
        })
    }

    pub fn intersection(parts: Vec<SmoothDomain>, sharpness: f64) -> Result<Self, GeometryError> {
        if parts.is_empty() {
            return Err(GeometryError::Construction("intersection of nothing".into()));
        }
        if sharpness <= 0.0 {
            return Err(GeometryError::Construction("sharpness must be positive".into()));
        }
        let dim = parts[0].dim;
        if parts.iter().any(|p| p.dim != dim) {
            return Err(GeometryError::Construction("mixed dimensions in intersection".into()));
        }
        let tightest = parts
            .iter()
            .min_by(|a, b| a.bounding_radius.total_cmp(&b.bounding_radius))
            .unwrap();
        let center = tightest.center.clone();
        let bounding_radius = tightest.bounding_radius;
        let collar_width = parts.iter().map(|p| p.collar_width).fold(f64::INFINITY, f64::min);
        let dom = SmoothDomain {
            shape: Shape::Intersection { parts, sharpness },
            dim,
            center,
            bounding_radius,
            collar_width,
        };
        dom.check_sampled()?;
        Ok(dom)
    }

    /// Domain from an arbitrary level function. The caller declares the
    /// bounding ball; non-degeneracy near the boundary is spot-checked by
    /// sampling at construction.
    pub fn custom(
        level: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
        grad: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
        center: Point,
        bounding_radius: f64,
        collar_width: f64,
    ) -> Result<Self, GeometryError> {
        if bounding_radius <= 0.0 || collar_width <= 0.0 {
            return Err(GeometryError::Construction(
                "bounding radius and collar width must be positive".into(),
            ));
        }
        let dim = center.len();
        let dom = SmoothDomain {
            shape: Shape::Custom { level, grad },
            dim,
            center,
            bounding_radius,
            collar_width,
        };
        dom.check_sampled()?;
        Ok(dom)
    }

    /// Sampled construction checks: the domain stays inside its declared
    /// bounding ball and the gradient does not vanish near the boundary.
    fn check_sampled(&self) -> Result<(), GeometryError> {
        let pad = 1.5 * self.bounding_radius;
        let pts = lowdisc::box_points(&self.center, pad, 2048);
        let mut near: Vec<(f64, &Point)> = Vec::new();
        let mut inside = 0usize;
        for p in &pts {
            let v = self.psi(p);
            if v < 0.0 {
                inside += 1;
                if (p - &self.center).norm() > self.bounding_radius + 1e-9 {
                    return Err(GeometryError::Construction(format!(
                        "domain escapes its bounding ball near ({:.4}, ...)",
                        p[0]
                    )));
                }
            }
            near.push((v.abs(), p));
        }
        if inside == 0 {
            return Err(GeometryError::Construction(
                "no interior point found inside the bounding ball".into(),
            ));
        }
        near.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, p) in near.iter().take(64) {
            let g = self.grad_psi(p).norm();
            if g < 1e-7 {
                return Err(GeometryError::Construction(format!(
                    "|∇ψ| = {g:.3e} near the boundary; level set is degenerate"
                )));
            }
        }
        Ok(())
    }

    pub fn with_collar_width(mut self, w: f64) -> Self {
        self.collar_width = w;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounding_center(&self) -> &Point {
        &self.center
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn collar_width(&self) -> f64 {
        self.collar_width
    }

    /// Level function value; negative strictly inside.
    pub fn psi(&self, x: &Point) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => (x - center).norm() - radius,
            Shape::Ellipsoid { center, semi_axes } => {
                let mut s = -1.0;
                for i in 0..self.dim {
                    let t = (x[i] - center[i]) / semi_axes[i];
                    s += t * t;
                }
                s
            }
            Shape::RoundCone { a, b, r_a, r_b } => round_cone_psi(x, a, b, *r_a, *r_b),
            Shape::Intersection { parts, sharpness } => {
                let vals: Vec<f64> = parts.iter().map(|p| p.psi(x)).collect();
                let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = vals.iter().map(|v| ((v - m) * sharpness).exp()).sum();
                m + sum.ln() / sharpness
            }
            Shape::Custom { level, .. } => level(x),
        }
    }

    pub fn grad_psi(&self, x: &Point) -> Point {
        match &self.shape {
            Shape::Ball { center, .. } => {
                let d = x - center;
                let n = d.norm();
                if n < 1e-15 {
                    unit_axis(self.dim, 0)
                } else {
                    d / n
                }
            }
            Shape::Ellipsoid { center, semi_axes } => DVector::from_iterator(
                self.dim,
                (0..self.dim).map(|i| 2.0 * (x[i] - center[i]) / (semi_axes[i] * semi_axes[i])),
            ),
            Shape::RoundCone { a, b, r_a, r_b } => round_cone_grad(x, a, b, *r_a, *r_b),
            Shape::Intersection { parts, sharpness } => {
                let vals: Vec<f64> = parts.iter().map(|p| p.psi(x)).collect();
                let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut num = DVector::zeros(self.dim);
                let mut den = 0.0;
                for (p, v) in parts.iter().zip(&vals) {
                    let w = ((v - m) * sharpness).exp();
                    num += p.grad_psi(x) * w;
                    den += w;
                }
                num / den
            }
            Shape::Custom { grad, .. } => grad(x),
        }
    }

    /// Strict membership: the boundary `ψ = 0` is excluded.
    pub fn contains(&self, x: &Point) -> bool {
        self.psi(x) < 0.0
    }

    /// Signed distance to the boundary, positive inside.
    pub fn signed_distance(&self, x: &Point) -> Result<f64, GeometryError> {
        match &self.shape {
            Shape::Ball { center, radius } => Ok(radius - (x - center).norm()),
            Shape::RoundCone { .. } => Ok(-self.psi(x)),
            _ => {
                let p = self.project_boundary(x)?;
                let d = (x - &p).norm();
                Ok(-self.psi(x).signum() * d)
            }
        }
    }

    /// Nearest boundary point (exact for balls and round cones, Newton
    /// foot-point elsewhere).
    pub fn project_boundary(&self, x: &Point) -> Result<Point, GeometryError> {
        let p = match &self.shape {
            Shape::Ball { center, radius } => {
                let d = x - center;
                let n = d.norm();
                if n < 1e-15 {
                    center + unit_axis(self.dim, 0) * *radius
                } else {
                    center + d * (*radius / n)
                }
            }
            Shape::RoundCone { .. } => {
                let g = self.grad_psi(x);
                x - g * self.psi(x)
            }
            _ => self.foot_point(x)?,
        };
        let res = self.psi(&p).abs();
        if res > 1e-10 * (1.0 + self.bounding_radius) {
            return Err(GeometryError::NumericalFailure {
                op: "project_boundary",
                detail: format!("residual |ψ| = {res:.3e} after projection"),
            });
        }
        Ok(p)
    }

    /// Unit outward normal at the projection of `x` onto the boundary.
    pub fn outer_normal(&self, x: &Point) -> Result<Point, GeometryError> {
        let p = self.project_boundary(x)?;
        let g = self.grad_psi(&p);
        let n = g.norm();
        if n < GRAD_FLOOR {
            return Err(GeometryError::DegenerateBoundary { grad_norm: n });
        }
        Ok(g / n)
    }

    /// Membership in the inset region `Ω^ρ = { x ∈ Ω : φ(x) ≥ ρ }`.
    /// `ρ = 0` reduces to plain membership.
    pub fn inset_contains(&self, x: &Point, rho: f64) -> Result<bool, GeometryError> {
        if !self.contains(x) {
            return Ok(false);
        }
        if rho <= 0.0 {
            return Ok(true);
        }
        Ok(self.signed_distance(x)? >= rho)
    }

    /// Low-discrepancy points with signed distance in `[phi_lo, phi_hi]`.
    /// Prefix-nested in `budget`; at most `keep` points returned.
    pub fn band_points(&self, phi_lo: f64, phi_hi: f64, budget: usize, keep: usize) -> Vec<Point> {
        let pad = self.bounding_radius + phi_hi.abs().max(phi_lo.abs()) + self.collar_width;
        lowdisc::filtered_box_points(&self.center, pad, budget, keep, |p| {
            match self.signed_distance(p) {
                Ok(phi) => phi >= phi_lo && phi <= phi_hi,
                Err(_) => false,
            }
        })
    }

    /// Newton foot-point projection with distance-descent damping. Seeded
    /// from `x` itself; falls back to a ray sweep when the direct seed
    /// diverges or sits on a gradient degeneracy.
    fn foot_point(&self, x: &Point) -> Result<Point, GeometryError> {
        if let Some(p) = self.polish_foot(x, x) {
            return Ok(p);
        }
        let seed = self.ray_sweep_nearest(x)?;
        self.polish_foot(x, &seed).ok_or_else(|| GeometryError::NumericalFailure {
            op: "project_boundary",
            detail: "foot-point iteration failed from both seeds".into(),
        })
    }

    fn newton_to_surface(&self, start: &Point) -> Option<Point> {
        let mut p = start.clone();
        let tol = SURFACE_TOL * (1.0 + self.bounding_radius);
        for _ in 0..60 {
            let v = self.psi(&p);
            if v.abs() <= tol {
                return Some(p);
            }
            let g = self.grad_psi(&p);
            let g2 = g.norm_squared();
            if g2 < GRAD_FLOOR * GRAD_FLOOR {
                return None;
            }
            p -= g * (v / g2);
            if !p.iter().all(|c| c.is_finite()) {
                return None;
            }
        }
        None
    }

    fn polish_foot(&self, x: &Point, seed: &Point) -> Option<Point> {
        let mut p = self.newton_to_surface(seed)?;
        let mut dist = (x - &p).norm();
        let tol = 1e-11 * (1.0 + self.bounding_radius);
        for _ in 0..120 {
            let g = self.grad_psi(&p);
            let gn = g.norm();
            if gn < GRAD_FLOOR {
                return None;
            }
            let n = g / gn;
            let to_x = x - &p;
            let tangential = &to_x - &n * to_x.dot(&n);
            if tangential.norm() <= tol {
                break;
            }
            let mut step = 1.0;
            let mut advanced = false;
            while step > 1e-6 {
                if let Some(cand) = self.newton_to_surface(&(&p + &tangential * step)) {
                    let d = (x - &cand).norm();
                    if d <= dist + 1e-15 {
                        p = cand;
                        dist = d;
                        advanced = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !advanced {
                break;
            }
        }
        // Final consistency: the foot must sit on the surface and be at
        // least as close as the straight-line crossing would suggest.
        if self.psi(&p).abs() <= 1e-10 * (1.0 + self.bounding_radius) {
            Some(p)
        } else {
            None
        }
    }

    /// Boundary point found by bisecting sign changes of `ψ` along a fan of
    /// rays from `x`; returns the nearest crossing.
    fn ray_sweep_nearest(&self, x: &Point) -> Result<Point, GeometryError> {
        let mut dirs: Vec<Point> = Vec::new();
        let to_center = &self.center - x;
        if to_center.norm() > 1e-12 {
            dirs.push(to_center.normalize());
            dirs.push(-to_center.normalize());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
        while dirs.len() < 48 {
            let v = DVector::from_iterator(self.dim, (0..self.dim).map(|_| std_normal(&mut rng)));
            let n = v.norm();
            if n > 1e-9 {
                dirs.push(v / n);
            }
        }
        let reach = (x - &self.center).norm() + self.bounding_radius + self.collar_width;
        let step = (self.bounding_radius / 64.0).max(1e-6);
        let mut best: Option<(f64, Point)> = None;
        for d in &dirs {
            let mut t_prev = 0.0;
            let mut v_prev = self.psi(x);
            let mut t = step;
            while t <= reach {
                let v = self.psi(&(x + d * t));
                if v_prev.signum() != v.signum() && v_prev.is_finite() && v.is_finite() {
                    let (mut lo, mut hi) = (t_prev, t);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let vm = self.psi(&(x + d * mid));
                        if vm.signum() == v_prev.signum() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let p = x + d * (0.5 * (lo + hi));
                    let dist = (&p - x).norm();
                    if best.as_ref().map_or(true, |(bd, _)| dist < *bd) {
                        best = Some((dist, p));
                    }
                    break;
                }
                t_prev = t;
                v_prev = v;
                t += step;
            }
        }
        best.map(|(_, p)| p).ok_or_else(|| GeometryError::NumericalFailure {
            op: "project_boundary",
            detail: "no boundary crossing found along sampled rays".into(),
        })
    }
}

fn unit_axis(dim: usize, k: usize) -> Point {
    let mut v = DVector::zeros(dim);
    v[k] = 1.0;
    v
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; one draw per call is plenty here.
    let u1: f64 = rng.random::<f64>().max(1e-16);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Exact distance to the convex hull of `B(a, r_a)` and `B(b, r_b)`,
/// negative inside.
fn round_cone_psi(x: &Point, a: &Point, b: &Point, r_a: f64, r_b: f64) -> f64 {
    let ba = b - a;
    let l2 = ba.norm_squared();
    let rr = r_a - r_b;
    let a2 = l2 - rr * rr;
    let il2 = 1.0 / l2;

    let pa = x - a;
    let y = pa.dot(&ba);
    let z = y - l2;
    let q = &pa * l2 - &ba * y;
    let x2 = q.norm_squared();
    let y2 = y * y * l2;
    let z2 = z * z * l2;

    let k = rr.signum() * rr * rr * x2;
    if z.signum() * a2 * z2 > k {
        (x2 + z2).sqrt() * il2 - r_b
    } else if y.signum() * a2 * y2 < k {
        (x2 + y2).sqrt() * il2 - r_a
    } else {
        ((x2 * a2 * il2).sqrt() + y * rr) * il2 - r_a
    }
}

fn round_cone_grad(x: &Point, a: &Point, b: &Point, r_a: f64, r_b: f64) -> Point {
    let ba = b - a;
    let l2 = ba.norm_squared();
    let rr = r_a - r_b;
    let a2 = l2 - rr * rr;
    let il2 = 1.0 / l2;

    let pa = x - a;
    let y = pa.dot(&ba);
    let z = y - l2;
    let q = &pa * l2 - &ba * y;
    let x2 = q.norm_squared();
    let y2 = y * y * l2;
    let z2 = z * z * l2;

    let k = rr.signum() * rr * rr * x2;
    if z.signum() * a2 * z2 > k {
        let d = x - b;
        let n = d.norm();
        if n < 1e-15 {
            return unit_axis(x.len(), 0);
        }
        return d / n;
    }
    if y.signum() * a2 * y2 < k {
        let d = pa;
        let n = d.norm();
        if n < 1e-15 {
            return unit_axis(x.len(), 0);
        }
        return d / n;
    }
    let s = (x2 * a2 * il2).sqrt();
    if s < 1e-15 {
        // On the skeleton axis the lateral direction is ambiguous; pick a
        // deterministic perpendicular.
        let mut t = unit_axis(x.len(), 0);
        let bn = &ba / ba.norm();
        t -= &bn * t.dot(&bn);
        if t.norm() < 1e-9 {
            t = unit_axis(x.len(), 1);
            t -= &bn * t.dot(&bn);
        }
        let tn = t.normalize();
        return (&tn * a2.sqrt() + &ba * (rr / ba.norm())) * (1.0 / ba.norm());
    }
    (q * (a2 / s) + ba * rr) * il2
}
