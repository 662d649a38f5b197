//! Shared fixtures for unit tests: small fields with closed-form flows.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{Point, SmoothDomain};
use crate::patchfield::{
    ControlDynamics, FeedbackPatch, Patch, PatchIndex, PatchyFeedback, PatchyField, VectorField,
};

pub fn v2(x: f64, y: f64) -> Point {
    DVector::from_vec(vec![x, y])
}

fn minus_identity() -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0]))
}

fn contraction(center: Point) -> VectorField {
    // g(x) = −(x − center)
    VectorField::Linear { a: minus_identity(), b: center }
}

/// One ball, linear contraction: flow is `e^{−t}·x0`.
pub fn s1() -> PatchyField {
    PatchyField::new(vec![Patch {
        index: PatchIndex(1),
        domain: SmoothDomain::ball(v2(0.0, 0.0), 2.0).unwrap(),
        field: contraction(v2(0.0, 0.0)),
        margin: 0.5,
    }])
    .unwrap()
}

/// Nested pair: big contraction toward the origin, inner ball contracting
/// toward (1, 0). From (2.5, 0) the switch happens at t = ln(5/3).
pub fn s2() -> PatchyField {
    PatchyField::new(vec![
        Patch {
            index: PatchIndex(1),
            domain: SmoothDomain::ball(v2(0.0, 0.0), 3.0).unwrap(),
            field: contraction(v2(0.0, 0.0)),
            margin: 0.5,
        },
        Patch {
            index: PatchIndex(2),
            domain: SmoothDomain::ball(v2(1.0, 0.0), 0.5).unwrap(),
            field: contraction(v2(1.0, 0.0)),
            margin: 0.5,
        },
    ])
    .unwrap()
}

/// Feedback whose closed loop is exactly `s2()`: f(x, u) = −x + u with
/// controls (0,0) and (1,0).
pub fn s2_feedback() -> PatchyFeedback {
    PatchyFeedback::new(
        ControlDynamics::affine(minus_identity(), "f(x,u) = -x + u"),
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
    .unwrap()
}

/// Single-ball feedback with f(x, u) = u and one constant control.
pub fn ball_feedback_constant(center: Point, radius: f64, control: Point) -> PatchyFeedback {
    PatchyFeedback::new(
        ControlDynamics::control_only(2),
        vec![FeedbackPatch {
            index: PatchIndex(1),
            domain: SmoothDomain::ball(center, radius).unwrap(),
            control,
        }],
    )
    .unwrap()
}

/// Rightward transport through a big ball grazing a higher-indexed disk
/// tangentially: from (−3, 0) the path touches `|x − (0,1)| = 1` at the
/// origin with zero normal speed.
pub fn tangency() -> PatchyField {
    PatchyField::new(vec![
        Patch {
            index: PatchIndex(1),
            domain: SmoothDomain::ball(v2(0.0, 0.0), 4.0).unwrap(),
            field: VectorField::Constant { v: v2(1.0, 0.0) },
            margin: 0.5,
        },
        Patch {
            index: PatchIndex(2),
            domain: SmoothDomain::ball(v2(0.0, 1.0), 1.0).unwrap(),
            field: contraction(v2(0.0, 1.0)),
            margin: 0.5,
        },
    ])
    .unwrap()
}
