//! Robustness constants estimated from collar sampling.
//!
//! All suprema/infima below are sampled estimates over deterministic,
//! prefix-nested low-discrepancy sweeps: growing the budget only refines
//! the same sample set, so the inward bound `c_prime` never increases with
//! budget. The derived ladder (`c_i`, `ell_i`, `delta`, `c_big`) is
//! computed from the sampled constants by exact recursions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FieldError, Patch, PatchyField};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobustnessConstants {
    /// collar half-width the estimates were taken at
    pub rho_bar: f64,
    /// uniform inward bound: ⟨g_α(x), n(x)⟩ ≤ −c_prime on checked collars
    pub c_prime: f64,
    /// bound on cross-patch inner products |⟨g_β(x), n_α(x)⟩|, β > α
    pub c_double_prime: f64,
    /// normalization of the outer-perturbation unit
    pub c_triple_prime: f64,
    /// ladder coefficients, one per patch, highest index last
    pub c_i: Vec<f64>,
    pub ell_i: Vec<f64>,
    /// admissible perturbation budget: rho_bar / (2·c_i[0])
    pub delta: f64,
    /// excess-measure proportionality budget: (N+1)·Σ ell_i
    pub c_big: f64,
    /// sampled sup of |g_α| over padded patches
    pub m_sup: f64,
    /// sampled Lipschitz bound of x ↦ g_α(x)
    pub c_bar: f64,
    /// collar transit budget: 3 / c_prime
    pub c_transit: f64,
    /// sampling-error gain bound: min(1/(2·c_transit), 1e6)
    pub k_bar: f64,
    /// sampling-period bound: min(c_transit·rho2, rho1/m_sup)
    pub delta_bar: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// per-patch dwell bounds, aligned with c_i/ell_i
    pub t_alpha: Vec<f64>,
    pub sample_budget: usize,
}

impl RobustnessConstants {
    /// Recompute the ladder from `c_prime`/`c_double_prime`/`c_triple_prime`
    /// and return the largest absolute deviation from the stored values.
    /// Zero (bitwise) whenever the struct came out of `estimate_constants`.
    pub fn recursion_residual(&self) -> f64 {
        let (c_i, ell_i) = ladder(self.c_i.len(), self.c_prime, self.c_double_prime, self.c_triple_prime);
        let mut worst = 0.0f64;
        for (a, b) in c_i.iter().zip(&self.c_i) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in ell_i.iter().zip(&self.ell_i) {
            worst = worst.max((a - b).abs());
        }
        worst = worst.max((self.delta - self.rho_bar / (2.0 * self.c_i[0])).abs());
        let n = self.c_i.len() as f64;
        worst = worst.max((self.c_big - (n + 1.0) * self.ell_i.iter().sum::<f64>()).abs());
        worst
    }

    /// Override the stationing radii and recompute the bounds that depend
    /// on them.
    pub fn with_rho(mut self, rho1: f64, rho2: f64) -> Self {
        self.rho1 = rho1;
        self.rho2 = rho2;
        self.delta_bar = delta_bar(self.c_transit, rho1, rho2, self.m_sup);
        self
    }
}

/// Exact backward recursion for the ladder coefficients.
fn ladder(n: usize, c_prime: f64, c_dp: f64, c_tp: f64) -> (Vec<f64>, Vec<f64>) {
    let mut c_i = vec![0.0; n];
    let mut ell_i = vec![0.0; n];
    c_i[n - 1] = 1.0 + c_tp;
    ell_i[n - 1] = 2.0 * c_i[n - 1] / c_prime;
    for i in (0..n - 1).rev() {
        let tail_c: f64 = c_i[i + 1..].iter().sum();
        let tail_ell: f64 = ell_i[i + 1..].iter().sum();
        c_i[i] = c_dp * ell_i[i + 1] + tail_c;
        ell_i[i] = (2.0 * c_i[i] + c_dp * tail_ell) / c_prime;
    }
    (c_i, ell_i)
}

fn delta_bar(c_transit: f64, rho1: f64, rho2: f64, m_sup: f64) -> f64 {
    let a = c_transit * rho2;
    if m_sup > 0.0 { a.min(rho1 / m_sup) } else { a }
}

/// Per-patch sampled quantities feeding the global constants.
struct PatchSamples {
    inward_min: f64,
    cross_max: f64,
    speed_max: f64,
    speed_min: f64,
    lipschitz: f64,
    bounding_radius: f64,
}

impl PatchyField {
    /// Estimate the constants controlling perturbation robustness at collar
    /// width `rho_bar`, drawing `sample_budget` kept samples per patch.
    ///
    /// Errors with `NonInwardCollar` when the sampled collar bound is not
    /// strictly positive — the field then has no inward margin to spend.
    pub fn estimate_constants(
        &self,
        rho_bar: f64,
        sample_budget: usize,
    ) -> Result<RobustnessConstants, FieldError> {
        let rho1 = rho_bar;
        let rho2 = rho_bar / 2.0;
        let per_patch: Vec<PatchSamples> = self
            .patches()
            .par_iter()
            .map(|patch| self.sample_patch(patch, rho_bar, rho2, sample_budget))
            .collect();

        let c_prime = per_patch.iter().map(|s| s.inward_min).fold(f64::INFINITY, f64::min);
        if !(c_prime > 0.0) || !c_prime.is_finite() {
            return Err(FieldError::NonInwardCollar(if c_prime.is_finite() { c_prime } else { 0.0 }));
        }
        let c_double_prime = per_patch.iter().map(|s| s.cross_max).fold(0.0f64, f64::max);
        let c_triple_prime = 1.0;

        let n = self.patches().len();
        let (c_i, ell_i) = ladder(n, c_prime, c_double_prime, c_triple_prime);
        let delta = rho_bar / (2.0 * c_i[0]);
        let c_big = (n as f64 + 1.0) * ell_i.iter().sum::<f64>();

        let m_sup = per_patch.iter().map(|s| s.speed_max).fold(0.0f64, f64::max);
        let c_bar = per_patch.iter().map(|s| s.lipschitz).fold(0.0f64, f64::max).max(1e-9);
        let c_transit = 3.0 / c_prime;
        let k_bar = (1.0 / (2.0 * c_transit)).min(1e6);
        let t_alpha = per_patch
            .iter()
            .map(|s| {
                let floor = s.speed_min.max(1e-6);
                (2.0 * (2.0 * s.bounding_radius) / floor).min(1e3)
            })
            .collect();

        Ok(RobustnessConstants {
            rho_bar,
            c_prime,
            c_double_prime,
            c_triple_prime,
            c_i,
            ell_i,
            delta,
            c_big,
            m_sup,
            c_bar,
            c_transit,
            k_bar,
            delta_bar: delta_bar(c_transit, rho1, rho2, m_sup),
            rho1,
            rho2,
            t_alpha,
            sample_budget,
        })
    }

    fn sample_patch(&self, patch: &Patch, rho_bar: f64, rho2: f64, keep: usize) -> PatchSamples {
        // inner collar: x ∈ Ω_α within rho_bar of the boundary
        let collar = patch.domain.band_points(0.0, rho_bar, keep * 512, keep);
        let mut inward_min = f64::INFINITY;
        let mut cross_max = 0.0f64;
        for x in &collar {
            let Ok(p) = patch.domain.project_boundary(x) else { continue };
            let Ok(n) = patch.domain.outer_normal(&p) else { continue };
            if !self.exempt_boundary_point(patch.index, &p) {
                let v = -patch.field.eval(x).dot(&n);
                if v < inward_min {
                    inward_min = v;
                }
            }
            // cross terms: fields of higher patches measured against this
            // patch's normal wherever they are defined nearby
            for other in self.patches().iter().rev() {
                if other.index <= patch.index {
                    break;
                }
                if other.domain.psi(x) <= other.margin {
                    let v = other.field.eval(x).dot(&n).abs();
                    if v > cross_max {
                        cross_max = v;
                    }
                }
            }
        }

        // bulk sweep over the patch padded outward: speed range and a
        // finite-difference Lipschitz bound
        let pad = rho2.min(patch.margin.max(0.0));
        let depth = patch.domain.bounding_radius() + pad + 1.0;
        let bulk = patch.domain.band_points(-pad, depth, keep * 64, keep);
        let mut speed_max = 0.0f64;
        let mut speed_min = f64::INFINITY;
        let mut lipschitz = 0.0f64;
        let h = 1e-4 * patch.domain.bounding_radius().max(1e-6);
        for (k, x) in bulk.iter().enumerate() {
            let g = patch.field.eval(x);
            let s = g.norm();
            speed_max = speed_max.max(s);
            speed_min = speed_min.min(s);
            let mut dir = nalgebra::DVector::zeros(x.len());
            dir[k % x.len()] = h;
            let g2 = patch.field.eval(&(x + &dir));
            lipschitz = lipschitz.max((g2 - g).norm() / h);
        }
        if bulk.is_empty() {
            speed_min = 0.0;
        }

        PatchSamples {
            inward_min,
            cross_max,
            speed_max,
            speed_min,
            lipschitz,
            bounding_radius: patch.domain.bounding_radius(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, SmoothDomain};
    use crate::patchfield::{Patch, PatchIndex, PatchyField, VectorField};
    use nalgebra::{DMatrix, DVector};

    fn v2(x: f64, y: f64) -> Point {
        DVector::from_vec(vec![x, y])
    }

    fn contraction_ball() -> PatchyField {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0]));
        PatchyField::new(vec![Patch {
            index: PatchIndex(1),
            domain: SmoothDomain::ball(v2(0.0, 0.0), 2.0).unwrap(),
            field: VectorField::Linear { a, b: v2(0.0, 0.0) },
            margin: 0.5,
        }])
        .unwrap()
    }

    #[test]
    fn single_contraction_ball_closed_forms() {
        // collar |x| ∈ [1.9, 2): inward product is |x|, so c' ≈ 1.9
        let c = contraction_ball().estimate_constants(0.1, 512).unwrap();
        assert!(c.c_prime >= 1.9 - 1e-9 && c.c_prime < 1.95, "c' = {}", c.c_prime);
        assert_eq!(c.c_i, vec![2.0]);
        assert_eq!(c.ell_i, vec![4.0 / c.c_prime]);
        assert_eq!(c.delta, 0.1 / 4.0);
        assert_eq!(c.c_big, 2.0 * c.ell_i[0]);
        // |g| = |x| ≤ 2 + pad on the sampled set
        assert!(c.m_sup > 1.5 && c.m_sup <= 2.2, "M = {}", c.m_sup);
        // Lipschitz constant of −x is exactly 1
        assert!((c.c_bar - 1.0).abs() < 1e-6, "c_bar = {}", c.c_bar);
        assert_eq!(c.c_transit, 3.0 / c.c_prime);
        assert_eq!(c.k_bar, c.c_prime / 6.0);
        assert_eq!(c.rho1, 0.1);
        assert_eq!(c.rho2, 0.05);
        assert_eq!(c.delta_bar, (c.c_transit * 0.05).min(0.1 / c.m_sup));
        assert_eq!(c.t_alpha.len(), 1);
    }

    #[test]
    fn ladder_matches_a_frozen_hand_rolled_recursion() {
        // independent re-statement of the backward recursion, checked on
        // arbitrary constants for three patches
        let (cp, cdp, ctp) = (0.7, 0.3, 1.0);
        let c3 = 1.0 + ctp;
        let l3 = 2.0 * c3 / cp;
        let c2 = cdp * l3 + c3;
        let l2 = (2.0 * c2 + cdp * l3) / cp;
        let c1 = cdp * l2 + c2 + c3;
        let l1 = (2.0 * c1 + cdp * (l2 + l3)) / cp;
        let (c_i, ell_i) = super::ladder(3, cp, cdp, ctp);
        assert_eq!(c_i, vec![c1, c2, c3]);
        assert_eq!(ell_i, vec![l1, l2, l3]);
    }

    #[test]
    fn recursion_residual_is_zero_bitwise() {
        let c = contraction_ball().estimate_constants(0.1, 256).unwrap();
        assert_eq!(c.recursion_residual(), 0.0);
    }

    #[test]
    fn inward_bound_never_grows_with_budget() {
        let field = contraction_ball();
        let mut prev = f64::INFINITY;
        for budget in [64, 128, 256, 512] {
            let c = field.estimate_constants(0.1, budget).unwrap();
            assert!(c.c_prime <= prev + 1e-15, "budget {budget}: {} > {prev}", c.c_prime);
            prev = c.c_prime;
        }
    }

    #[test]
    fn outward_field_reports_non_inward_collar() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0]));
        let field = PatchyField::new(vec![Patch {
            index: PatchIndex(1),
            domain: SmoothDomain::ball(v2(0.0, 0.0), 1.0).unwrap(),
            field: VectorField::Linear { a, b: v2(0.0, 0.0) },
            margin: 0.2,
        }])
        .unwrap();
        assert!(matches!(
            field.estimate_constants(0.1, 128),
            Err(FieldError::NonInwardCollar(_))
        ));
    }

    #[test]
    fn estimates_are_deterministic_and_round_trip() {
        let field = contraction_ball();
        let a = field.estimate_constants(0.1, 256).unwrap();
        let b = field.estimate_constants(0.1, 256).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let back: RobustnessConstants =
            serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back.c_prime, a.c_prime);
        assert_eq!(back.ell_i, a.ell_i);
        assert_eq!(back.recursion_residual(), 0.0);
    }

    #[test]
    fn rho_override_recomputes_the_period_bound() {
        let c = contraction_ball().estimate_constants(0.1, 128).unwrap();
        let c2 = c.clone().with_rho(0.2, 0.01);
        assert_eq!(c2.delta_bar, (c2.c_transit * 0.01).min(0.2 / c2.m_sup));
        assert_eq!(c2.c_prime, c.c_prime);
    }
}
