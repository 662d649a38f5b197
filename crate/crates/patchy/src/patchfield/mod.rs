//! Ordered patch families and the selection rule.
//!
//! A patch is a smooth domain `Ω_α` with a smooth vector field `g_α` defined
//! on a margin around its closure. A patchy field is a finite family with
//! strictly increasing integer indices; the field at `x` is the one of the
//! highest-indexed patch whose open domain contains `x`:
//! `g(x) = g_{α*(x)}(x)` with `α*(x) = max{α : x ∈ Ω_α}`.
//!
//! The inward check and the constant budget live in the `validate` and
//! `constants` submodules; both treat sampled suprema as stand-ins for the
//! exact ones and report their sample counts.

mod constants;
mod validate;

pub use constants::RobustnessConstants;
pub use validate::{PatchValidation, ValidationReport};

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::geometry::{GeometryError, Point, SmoothDomain};

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct PatchIndex(pub i64);

impl fmt::Display for PatchIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FieldError {
    #[error("point lies outside every patch domain")]
    OutsideDomain,
    #[error("patch indices must be strictly increasing and unique")]
    UnorderedIndices,
    #[error("patch dimensions disagree")]
    DimensionMismatch,
    #[error("a field needs at least one patch")]
    Empty,
    #[error("collar is not strictly inward: worst estimate c' = {0}")]
    NonInwardCollar(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Smooth vector field shapes used by patches. `Linear` means `A·x + b`.
#[derive(Clone)]
pub enum VectorField {
    Constant { v: DVector<f64> },
    Linear { a: DMatrix<f64>, b: DVector<f64> },
    Custom(Arc<dyn Fn(&Point) -> Point + Send + Sync>),
}

impl VectorField {
    pub fn eval(&self, x: &Point) -> Point {
        match self {
            VectorField::Constant { v } => v.clone(),
            VectorField::Linear { a, b } => a * x + b,
            VectorField::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Constant { v } => write!(f, "Constant({v:?})"),
            VectorField::Linear { .. } => write!(f, "Linear"),
            VectorField::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Patch {
    pub index: PatchIndex,
    pub domain: SmoothDomain,
    pub field: VectorField,
    /// the field must stay evaluable within this distance of the closure
    pub margin: f64,
}

/// Region where stabilization is declared achieved. Boundary portions of a
/// patch inside it are exempt from the inward check: trajectories are meant
/// to leave through them.
#[derive(Clone, Debug)]
pub struct TargetRegion {
    pub center: Point,
    pub radius: f64,
}

impl TargetRegion {
    pub fn contains(&self, x: &Point) -> bool {
        (x - &self.center).norm() < self.radius
    }
}

/// Declared working region; used only for cover-gap reporting.
#[derive(Clone, Debug)]
pub enum AmbientRegion {
    Ball { center: Point, radius: f64 },
    Annulus { center: Point, inner: f64, outer: f64 },
}

impl AmbientRegion {
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            AmbientRegion::Ball { center, radius } => (x - center).norm() <= *radius,
            AmbientRegion::Annulus { center, inner, outer } => {
                let r = (x - center).norm();
                r >= *inner && r <= *outer
            }
        }
    }

    pub fn bounding(&self) -> (&Point, f64) {
        match self {
            AmbientRegion::Ball { center, radius } => (center, *radius),
            AmbientRegion::Annulus { center, outer, .. } => (center, *outer),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PatchyField {
    patches: Vec<Patch>,
    dim: usize,
    target: Option<TargetRegion>,
    ambient: Option<AmbientRegion>,
}

impl PatchyField {
    pub fn new(patches: Vec<Patch>) -> Result<Self, FieldError> {
        if patches.is_empty() {
            return Err(FieldError::Empty);
        }
        let dim = patches[0].domain.dim();
        for pair in patches.windows(2) {
            if pair[1].index <= pair[0].index {
                return Err(FieldError::UnorderedIndices);
            }
        }
        if patches.iter().any(|p| p.domain.dim() != dim) {
            return Err(FieldError::DimensionMismatch);
        }
        Ok(PatchyField { patches, dim, target: None, ambient: None })
    }

    pub fn with_target(mut self, target: TargetRegion) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_ambient(mut self, ambient: AmbientRegion) -> Self {
        self.ambient = Some(ambient);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn target(&self) -> Option<&TargetRegion> {
        self.target.as_ref()
    }

    pub fn ambient(&self) -> Option<&AmbientRegion> {
        self.ambient.as_ref()
    }

    pub fn patch(&self, index: PatchIndex) -> Option<&Patch> {
        self.patches.iter().find(|p| p.index == index)
    }

    pub fn indices(&self) -> Vec<PatchIndex> {
        self.patches.iter().map(|p| p.index).collect()
    }

    /// The selection rule: highest index whose open domain contains `x`.
    pub fn alpha_star_opt(&self, x: &Point) -> Option<PatchIndex> {
        self.patches.iter().rev().find(|p| p.domain.contains(x)).map(|p| p.index)
    }

    pub fn alpha_star(&self, x: &Point) -> Result<PatchIndex, FieldError> {
        self.alpha_star_opt(x).ok_or(FieldError::OutsideDomain)
    }

    /// `g(x) = g_{α*(x)}(x)`.
    pub fn eval(&self, x: &Point) -> Result<Point, FieldError> {
        let idx = self.alpha_star(x)?;
        Ok(self.eval_patch(idx, x))
    }

    /// Evaluate one patch's field regardless of the selection rule.
    pub fn eval_patch(&self, index: PatchIndex, x: &Point) -> Point {
        self.patch(index).expect("known patch index").field.eval(x)
    }

    /// True when some strictly higher-indexed open domain contains `x`.
    pub fn higher_contains(&self, index: PatchIndex, x: &Point) -> bool {
        self.patches
            .iter()
            .rev()
            .take_while(|p| p.index > index)
            .any(|p| p.domain.contains(x))
    }

    /// Boundary points exempt from the inward condition: those already
    /// covered by a higher patch, or inside the declared target region.
    pub fn exempt_boundary_point(&self, index: PatchIndex, p: &Point) -> bool {
        if self.higher_contains(index, p) {
            return true;
        }
        self.target.as_ref().is_some_and(|t| t.contains(p))
    }
}

/// Controlled dynamics `ẋ = f(x, u)`.
#[derive(Clone)]
pub enum ControlMap {
    /// f(x, u) = u
    ControlOnly,
    /// f(x, u) = A·x + u
    AffineState { a: DMatrix<f64> },
    Custom(Arc<dyn Fn(&Point, &DVector<f64>) -> Point + Send + Sync>),
}

#[derive(Clone)]
pub struct ControlDynamics {
    pub map: ControlMap,
    pub control_dim: usize,
    pub description: String,
}

impl ControlDynamics {
    pub fn control_only(control_dim: usize) -> Self {
        ControlDynamics { map: ControlMap::ControlOnly, control_dim, description: "f(x,u) = u".into() }
    }

    pub fn affine(a: DMatrix<f64>, description: impl Into<String>) -> Self {
        let control_dim = a.nrows();
        ControlDynamics { map: ControlMap::AffineState { a }, control_dim, description: description.into() }
    }

    pub fn eval(&self, x: &Point, u: &DVector<f64>) -> Point {
        match &self.map {
            ControlMap::ControlOnly => u.clone(),
            ControlMap::AffineState { a } => a * x + u,
            ControlMap::Custom(f) => f(x, u),
        }
    }
}

impl fmt::Debug for ControlDynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ControlDynamics({})", self.description)
    }
}

#[derive(Clone, Debug)]
pub struct FeedbackPatch {
    pub index: PatchIndex,
    pub domain: SmoothDomain,
    pub control: DVector<f64>,
}

/// Piecewise-constant feedback `U(x) = k_{α*(x)}` over an ordered family of
/// domains; its closed loop is a patchy field.
#[derive(Clone, Debug)]
pub struct PatchyFeedback {
    dynamics: ControlDynamics,
    patches: Vec<FeedbackPatch>,
    target: Option<TargetRegion>,
    ambient: Option<AmbientRegion>,
}

impl PatchyFeedback {
    pub fn new(dynamics: ControlDynamics, patches: Vec<FeedbackPatch>) -> Result<Self, FieldError> {
        if patches.is_empty() {
            return Err(FieldError::Empty);
        }
        let dim = patches[0].domain.dim();
        for pair in patches.windows(2) {
            if pair[1].index <= pair[0].index {
                return Err(FieldError::UnorderedIndices);
            }
        }
        if patches.iter().any(|p| p.domain.dim() != dim)
            || patches.iter().any(|p| p.control.len() != dynamics.control_dim)
        {
            return Err(FieldError::DimensionMismatch);
        }
        Ok(PatchyFeedback { dynamics, patches, target: None, ambient: None })
    }

    pub fn with_target(mut self, target: TargetRegion) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_ambient(mut self, ambient: AmbientRegion) -> Self {
        self.ambient = Some(ambient);
        self
    }

    pub fn dynamics(&self) -> &ControlDynamics {
        &self.dynamics
    }

    pub fn patches(&self) -> &[FeedbackPatch] {
        &self.patches
    }

    pub fn target(&self) -> Option<&TargetRegion> {
        self.target.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.patches[0].domain.dim()
    }

    pub fn alpha_star_opt(&self, x: &Point) -> Option<PatchIndex> {
        self.patches.iter().rev().find(|p| p.domain.contains(x)).map(|p| p.index)
    }

    pub fn alpha_star(&self, x: &Point) -> Result<PatchIndex, FieldError> {
        self.alpha_star_opt(x).ok_or(FieldError::OutsideDomain)
    }

    /// `U(x)`: the control of the selected patch.
    pub fn control_at(&self, x: &Point) -> Result<&DVector<f64>, FieldError> {
        let idx = self.alpha_star(x)?;
        Ok(&self.patches.iter().find(|p| p.index == idx).unwrap().control)
    }

    pub fn control_of(&self, index: PatchIndex) -> Option<&DVector<f64>> {
        self.patches.iter().find(|p| p.index == index).map(|p| &p.control)
    }

    /// The closed loop: per patch, `g_α(x) = f(x, k_α)` with the same
    /// domains and ordering. No validation is implied.
    pub fn closed_loop(&self) -> PatchyField {
        let patches = self
            .patches
            .iter()
            .map(|p| {
                let field = match &self.dynamics.map {
                    ControlMap::ControlOnly => VectorField::Constant { v: p.control.clone() },
                    ControlMap::AffineState { a } => {
                        VectorField::Linear { a: a.clone(), b: p.control.clone() }
                    }
                    ControlMap::Custom(f) => {
                        let f = f.clone();
                        let k = p.control.clone();
                        VectorField::Custom(Arc::new(move |x: &Point| f(x, &k)))
                    }
                };
                Patch { index: p.index, domain: p.domain.clone(), field, margin: 0.1 }
            })
            .collect();
        let mut field = PatchyField::new(patches).expect("feedback invariants imply field invariants");
        field.target = self.target.clone();
        field.ambient = self.ambient.clone();
        field
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2(x: f64, y: f64) -> Point {
        DVector::from_vec(vec![x, y])
    }

    fn minus_identity() -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0]))
    }

    /// Two nested patches: big contraction ball, small transport ball.
    fn two_patch_field() -> PatchyField {
        let p1 = Patch {
            index: PatchIndex(1),
            domain: SmoothDomain::ball(v2(0.0, 0.0), 3.0).unwrap(),
            field: VectorField::Linear { a: minus_identity(), b: v2(0.0, 0.0) },
            margin: 0.5,
        };
        let p2 = Patch {
            index: PatchIndex(2),
            domain: SmoothDomain::ball(v2(1.0, 0.0), 0.5).unwrap(),
            field: VectorField::Linear { a: minus_identity(), b: v2(1.0, 0.0) },
            margin: 0.5,
        };
        PatchyField::new(vec![p1, p2]).unwrap()
    }

    #[test]
    fn selection_takes_the_highest_containing_index() {
        let f = two_patch_field();
        assert_eq!(f.alpha_star(&v2(2.0, 0.0)).unwrap(), PatchIndex(1));
        assert_eq!(f.alpha_star(&v2(1.2, 0.0)).unwrap(), PatchIndex(2));
        assert!(matches!(f.alpha_star(&v2(4.0, 0.0)), Err(FieldError::OutsideDomain)));
    }

    #[test]
    fn eval_uses_the_selected_patch() {
        let f = two_patch_field();
        let g = f.eval(&v2(1.2, 0.0)).unwrap();
        assert!((g - v2(-0.2, 0.0)).norm() < 1e-14);
        let g = f.eval(&v2(2.0, 0.0)).unwrap();
        assert!((g - v2(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn selection_matches_partition_membership() {
        // D_α = Ω_α \ ∪_{β>α} Ω_β partitions the covered set; the selected
        // index is the unique α with x ∈ D_α.
        let f = two_patch_field();
        let pts = crate::lowdisc::box_points(&v2(0.0, 0.0), 3.2, 512);
        for x in &pts {
            let Some(star) = f.alpha_star_opt(x) else { continue };
            let mut holders = Vec::new();
            for p in f.patches() {
                let in_d = p.domain.contains(x) && !f.higher_contains(p.index, x);
                if in_d {
                    holders.push(p.index);
                }
            }
            assert_eq!(holders, vec![star], "at {x:?}");
        }
    }

    #[test]
    fn duplicate_indices_rejected() {
        let d = SmoothDomain::ball(v2(0.0, 0.0), 1.0).unwrap();
        let mk = |i| Patch {
            index: PatchIndex(i),
            domain: d.clone(),
            field: VectorField::Constant { v: v2(0.0, 0.0) },
            margin: 0.1,
        };
        assert!(matches!(
            PatchyField::new(vec![mk(1), mk(1)]),
            Err(FieldError::UnorderedIndices)
        ));
        assert!(matches!(PatchyField::new(vec![mk(2), mk(1)]), Err(FieldError::UnorderedIndices)));
    }

    #[test]
    fn closed_loop_of_control_only_dynamics_is_constant_per_patch() {
        let fb = PatchyFeedback::new(
            ControlDynamics::control_only(2),
            vec![FeedbackPatch {
                index: PatchIndex(1),
                domain: SmoothDomain::ball(v2(0.0, 0.0), 2.0).unwrap(),
                control: v2(0.0, -1.0),
            }],
        )
        .unwrap();
        let f = fb.closed_loop();
        assert!((f.eval(&v2(0.3, 0.3)).unwrap() - v2(0.0, -1.0)).norm() == 0.0);
    }

    #[test]
    fn closed_loop_of_affine_dynamics_recovers_linear_field() {
        let fb = PatchyFeedback::new(
            ControlDynamics::affine(minus_identity(), "f(x,u) = -x + u"),
            vec![FeedbackPatch {
                index: PatchIndex(1),
                domain: SmoothDomain::ball(v2(0.0, 0.0), 2.0).unwrap(),
                control: v2(0.0, 0.0),
            }],
        )
        .unwrap();
        let f = fb.closed_loop();
        let g = f.eval(&v2(0.7, -0.2)).unwrap();
        assert!((g - v2(-0.7, 0.2)).norm() < 1e-15);
    }

    #[test]
    fn control_selection_follows_alpha_star() {
        let fb = PatchyFeedback::new(
            ControlDynamics::control_only(2),
            vec![
                FeedbackPatch {
                    index: PatchIndex(1),
                    domain: SmoothDomain::ball(v2(0.0, 0.0), 3.0).unwrap(),
                    control: v2(0.0, 0.0),
                },
                FeedbackPatch {
                    index: PatchIndex(2),
                    domain: SmoothDomain::ball(v2(1.0, 0.0), 0.5).unwrap(),
                    control: v2(1.0, 0.0),
                },
            ],
        )
        .unwrap();
        assert_eq!(fb.control_at(&v2(1.2, 0.0)).unwrap(), &v2(1.0, 0.0));
        assert_eq!(fb.control_at(&v2(2.0, 0.0)).unwrap(), &v2(0.0, 0.0));
    }
}
