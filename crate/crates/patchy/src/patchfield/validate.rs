//! Inward-pointing validation along sampled boundary collars.

use serde::{Deserialize, Serialize};

use super::{PatchyField, TargetRegion};

/// Worst-case inner-product summary for one patch boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatchValidation {
    pub index: i64,
    /// boundary samples that were actually checked
    pub samples_used: usize,
    /// samples exempt from the check: covered by a higher patch or inside
    /// the target region
    pub samples_excluded: usize,
    /// max over samples of ⟨g_α(x) + v, n(x)⟩ with v the worst admissible
    /// perturbation, v = χ·n
    pub worst_inner_product: f64,
    /// distance to failure: −worst_inner_product
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub chi: f64,
    pub samples_per_boundary: usize,
    pub per_patch: Vec<PatchValidation>,
    /// fraction of sampled ambient points covered by no patch (absent when
    /// no ambient region is declared); informational, never fails the check
    pub cover_gap_fraction: Option<f64>,
    pub cover_gap_examples: Vec<Vec<f64>>,
    pub passes: bool,
}

impl ValidationReport {
    pub fn patch(&self, index: i64) -> Option<&PatchValidation> {
        self.per_patch.iter().find(|p| p.index == index)
    }
}

impl PatchyField {
    /// Check the inward-pointing condition on each patch boundary under the
    /// worst perturbation of magnitude `chi`.
    ///
    /// Boundary points are drawn from a thin collar by a deterministic
    /// low-discrepancy sweep and projected onto the boundary. A sample is
    /// exempt when a strictly higher-indexed open domain contains it (the
    /// selection rule never consults this patch there) or when it lies in
    /// the declared target region (outflow there is intended). The check
    /// passes iff every remaining sample has ⟨g_α(x), n(x)⟩ + χ < 0.
    ///
    /// Larger `samples_per_boundary` re-uses earlier samples (prefix
    /// nesting), so a reported worst case never improves as the budget
    /// grows.
    pub fn validate(&self, samples_per_boundary: usize, chi: f64) -> ValidationReport {
        let mut per_patch = Vec::with_capacity(self.patches().len());
        for patch in self.patches() {
            let collar = patch.domain.collar_width().max(1e-6);
            let pts = patch.domain.band_points(-collar, collar, samples_per_boundary * 512, samples_per_boundary);
            let mut used = 0usize;
            let mut excluded = 0usize;
            let mut worst = f64::NEG_INFINITY;
            for x in &pts {
                let Ok(p) = patch.domain.project_boundary(x) else { continue };
                if self.exempt_boundary_point(patch.index, &p) {
                    excluded += 1;
                    continue;
                }
                let Ok(n) = patch.domain.outer_normal(&p) else { continue };
                let g = patch.field.eval(&p);
                let ip = g.dot(&n) + chi;
                if ip > worst {
                    worst = ip;
                }
                used += 1;
            }
            per_patch.push(PatchValidation {
                index: patch.index.0,
                samples_used: used,
                samples_excluded: excluded,
                worst_inner_product: worst,
                margin: -worst,
            });
        }

        let (cover_gap_fraction, cover_gap_examples) = self.cover_gaps(4096);
        let passes = per_patch.iter().all(|p| p.worst_inner_product < 0.0);
        ValidationReport {
            chi,
            samples_per_boundary,
            per_patch,
            cover_gap_fraction,
            cover_gap_examples,
            passes,
        }
    }

    /// Rejection-sample the declared ambient region and report the fraction
    /// covered by no patch. Points inside the target region count as
    /// covered: the construction is allowed to stop there.
    fn cover_gaps(&self, budget: usize) -> (Option<f64>, Vec<Vec<f64>>) {
        let Some(ambient) = self.ambient() else {
            return (None, Vec::new());
        };
        let (center, radius) = ambient.bounding();
        let target = self.target().cloned();
        let in_region = |x: &crate::geometry::Point| ambient.contains(x);
        let pts = crate::lowdisc::filtered_box_points(center, radius * 1.0001, budget * 16, budget, in_region);
        if pts.is_empty() {
            return (Some(1.0), Vec::new());
        }
        let covered = |x: &crate::geometry::Point, target: &Option<TargetRegion>| {
            self.alpha_star_opt(x).is_some() || target.as_ref().is_some_and(|t| t.contains(x))
        };
        let mut gaps = 0usize;
        let mut examples = Vec::new();
        for x in &pts {
            if !covered(x, &target) {
                gaps += 1;
                if examples.len() < 8 {
                    examples.push(x.iter().copied().collect());
                }
            }
        }
        (Some(gaps as f64 / pts.len() as f64), examples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, SmoothDomain};
    use crate::patchfield::{AmbientRegion, Patch, PatchIndex, PatchyField, TargetRegion, VectorField};
    use nalgebra::{DMatrix, DVector};

    fn v2(x: f64, y: f64) -> Point {
        DVector::from_vec(vec![x, y])
    }

    /// Single ball patch, linear contraction toward the origin.
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
    fn contraction_ball_passes_with_margin_two() {
        // on |x| = 2 the inner product is ⟨−x, x/2⟩ = −2 everywhere
        let report = contraction_ball().validate(256, 0.0);
        assert!(report.passes);
        let p = report.patch(1).unwrap();
        assert!((p.margin - 2.0).abs() < 1e-9, "margin = {}", p.margin);
        assert!(p.samples_used > 0);
    }

    #[test]
    fn large_perturbation_fails_the_same_field() {
        let report = contraction_ball().validate(256, 3.0);
        assert!(!report.passes);
        let p = report.patch(1).unwrap();
        assert!((p.worst_inner_product - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exempt_arcs_are_skipped_and_counted() {
        // patch 1 = unit ball around (0,0) with outward drift (would fail);
        // patch 2 covers its entire right half where the drift points out.
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0]));
        let p1 = Patch {
            index: PatchIndex(1),
            domain: SmoothDomain::ball(v2(0.0, 0.0), 1.0).unwrap(),
            field: VectorField::Linear { a, b: v2(0.0, 0.0) },
            margin: 0.3,
        };
        let p2 = Patch {
            index: PatchIndex(2),
            domain: SmoothDomain::ball(v2(1.1, 0.0), 1.6).unwrap(),
            field: VectorField::Constant { v: v2(-1.0, 0.0) },
            margin: 0.3,
        };
        let field = PatchyField::new(vec![p1, p2]).unwrap();
        let report = field.validate(128, 0.0);
        let p = report.patch(1).unwrap();
        assert!(p.samples_excluded > 0, "right-half samples must be exempt");
        // the left half still fails: outward drift with no higher cover
        assert!(p.worst_inner_product > 0.0);
        assert!(!report.passes);
    }

    #[test]
    fn target_region_waives_the_outflow_arc() {
        // constant downward transport through a ball; the bottom boundary
        // points outward but sits inside the declared target.
        let patch = Patch {
            index: PatchIndex(1),
            domain: SmoothDomain::ball(v2(0.0, 1.0), 0.6).unwrap(),
            field: VectorField::Constant { v: v2(0.0, -1.0) },
            margin: 0.3,
        };
        let bare = PatchyField::new(vec![patch.clone()]).unwrap();
        assert!(!bare.validate(256, 0.0).passes);

        // the outward arc is the lower half-circle; its farthest point from
        // the origin sits at (±0.6, 1.0), distance √1.36 ≈ 1.17, so a target
        // of radius 1.2 waives all of it (and the tangential equator points)
        let with_target = PatchyField::new(vec![patch])
            .unwrap()
            .with_target(TargetRegion { center: v2(0.0, 0.0), radius: 1.2 });
        let report = with_target.validate(256, 0.0);
        assert!(report.passes, "worst = {}", report.patch(1).unwrap().worst_inner_product);
        assert!(report.patch(1).unwrap().samples_excluded > 0);
    }

    #[test]
    fn cover_gaps_reported_but_not_fatal() {
        let field = contraction_ball()
            .with_ambient(AmbientRegion::Ball { center: v2(0.0, 0.0), radius: 3.0 });
        let report = field.validate(64, 0.0);
        let gap = report.cover_gap_fraction.unwrap();
        // patch ball covers (2/3)^2 of the ambient ball's area
        assert!(gap > 0.4 && gap < 0.7, "gap = {gap}");
        assert!(!report.cover_gap_examples.is_empty());
        assert!(report.passes);
    }

    #[test]
    fn worst_case_never_improves_with_budget() {
        let field = contraction_ball();
        let mut prev = f64::NEG_INFINITY;
        for budget in [32, 64, 128, 256] {
            let w = field.validate(budget, 0.0).patch(1).unwrap().worst_inner_product;
            assert!(w >= prev - 1e-15, "budget {budget}: {w} < {prev}");
            prev = w;
        }
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = contraction_ball().validate(64, 0.1);
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: ValidationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.per_patch.len(), report.per_patch.len());
        assert_eq!(back.passes, report.passes);
        assert_eq!(back.patch(1).unwrap().worst_inner_product, report.patch(1).unwrap().worst_inner_product);
    }
}
