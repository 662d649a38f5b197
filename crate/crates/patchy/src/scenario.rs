//! Scenario files: a single JSON document describing a field (or feedback
//! law), named perturbation signals, integrator settings, and study
//! parameters. Parsing is strict — unknown keys are rejected and errors
//! carry the line/column they came from — and every section builds into
//! the corresponding runtime object.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyze::ErrorProfile;
use crate::bvsignal::{AcKind, AcPiece, AcSignal, BVSignal};
use crate::geometry::{Point, SmoothDomain};
use crate::integrate::IntegratorConfig;
use crate::patchfield::{
    AmbientRegion, ControlDynamics, FeedbackPatch, Patch, PatchIndex, PatchyFeedback, PatchyField,
    TargetRegion, VectorField,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario: {0}")]
    Build(String),
}

fn build_err(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Build(msg.into())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { center: Vec<f64>, semi_axes: Vec<f64> },
    /// capsule/cone hull between two balls: the set of points within an
    /// interpolated radius of segment a–b
    Capsule { a: Vec<f64>, b: Vec<f64>, ra: f64, rb: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Constant { v: Vec<f64> },
    /// affine field A·x + b
    Linear { a: Vec<Vec<f64>>, b: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub index: i64,
    pub domain: DomainSpec,
    pub field: FieldSpec,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    0.1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DynamicsSpec {
    /// ẋ = u
    ControlOnly,
    /// ẋ = A·x + u
    Affine { a: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackPatchSpec {
    pub index: i64,
    pub domain: DomainSpec,
    pub control: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmbientSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_event_tol")]
    pub event_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_events")]
    pub max_events: usize,
}

fn default_dt() -> f64 {
    1e-3
}
fn default_event_tol() -> f64 {
    1e-6
}
fn default_max_events() -> usize {
    10_000
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            dt: default_dt(),
            event_tol: default_event_tol(),
            seed: 0,
            max_events: default_max_events(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub t: f64,
    pub dw: Vec<f64>,
}

/// One density piece of a signal: `{t0, t1, kind, …params}` in JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcPieceSpec {
    Constant { t0: f64, t1: f64, rate: Vec<f64> },
    Linear { t0: f64, t1: f64, rate0: Vec<f64>, rate1: Vec<f64> },
    Sinusoid { t0: f64, t1: f64, amp: Vec<f64>, omega: f64, phase: f64 },
}

impl AcPieceSpec {
    fn span(&self) -> (f64, f64) {
        match self {
            AcPieceSpec::Constant { t0, t1, .. }
            | AcPieceSpec::Linear { t0, t1, .. }
            | AcPieceSpec::Sinusoid { t0, t1, .. } => (*t0, *t1),
        }
    }
}

/// A named bounded-variation input: jump times/sizes plus an absolutely
/// continuous density given piecewise.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub t0: f64,
    pub t_end: f64,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
    #[serde(default)]
    pub jumps: Vec<JumpSpec>,
    #[serde(default)]
    pub ac: Vec<AcPieceSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    /// sampling period bound: steps fall in [δ/2, δ]
    pub delta: f64,
    /// measurement error budget per unit period; |e_i| ≤ k̄·δ
    #[serde(default)]
    pub k_bar: f64,
    #[serde(default)]
    pub error: Option<ErrorProfile>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub x0: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    /// name of the impulsive input for `--mode impulsive`
    #[serde(default)]
    pub w: Option<String>,
    /// name of the measurement-noise input for `--mode feedback`
    #[serde(default)]
    pub zeta: Option<String>,
    /// name of the density-only disturbance for feedback/sampling modes
    #[serde(default)]
    pub d: Option<String>,
    /// sample-and-hold plan for `--mode sampling`
    #[serde(default)]
    pub plan: Option<PlanSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    #[serde(default = "default_samples")]
    pub samples_per_boundary: usize,
    #[serde(default)]
    pub chi: f64,
}

fn default_samples() -> usize {
    64
}

impl Default for ValidateSpec {
    fn default() -> Self {
        ValidateSpec { samples_per_boundary: default_samples(), chi: 0.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    pub rho_bar: f64,
    #[serde(default = "default_samples")]
    pub sample_budget: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub x0: Vec<f64>,
    pub tv_sequence: Vec<f64>,
    /// name of the signal whose shape is rescaled to each variation
    pub profile: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prop22Spec {
    pub x0: Vec<f64>,
    pub w: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustSpec {
    pub r: f64,
    pub s: f64,
    pub chi: f64,
    pub t_end: f64,
    pub initial_grid: Vec<Vec<f64>>,
    pub zeta: Vec<String>,
    pub d: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingStudySpec {
    pub r: f64,
    pub s: f64,
    pub chi: f64,
    pub delta: f64,
    pub k_bar: f64,
    pub t_end: f64,
    pub initial_grid: Vec<Vec<f64>>,
    pub errors: Vec<ErrorProfile>,
    pub d: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceSpec {
    pub patch_index: i64,
    pub rho: f64,
    #[serde(default)]
    pub chi: f64,
    #[serde(default = "default_samples")]
    pub sample_budget: usize,
    pub t_end: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    #[serde(default)]
    pub convergence: Option<ConvergenceSpec>,
    #[serde(default)]
    pub prop22: Option<Prop22Spec>,
    #[serde(default)]
    pub robust: Option<RobustSpec>,
    #[serde(default)]
    pub sampling: Option<SamplingStudySpec>,
    #[serde(default)]
    pub invariance: Option<InvarianceSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// format version; this library writes and reads version 1
    pub schema: u32,
    pub dimension: usize,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub patches: Vec<PatchSpec>,
    #[serde(default)]
    pub dynamics: Option<DynamicsSpec>,
    #[serde(default)]
    pub feedback: Vec<FeedbackPatchSpec>,
    #[serde(default)]
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub ambient: Option<AmbientSpec>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub signals: BTreeMap<String, SignalSpec>,
    #[serde(default)]
    pub run: Option<RunSpec>,
    #[serde(default)]
    pub validate: Option<ValidateSpec>,
    #[serde(default)]
    pub constants: Option<ConstantsSpec>,
    #[serde(default)]
    pub study: Option<StudySpec>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let sc: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if sc.schema != SCHEMA_VERSION {
            return Err(build_err(format!(
                "unsupported schema version {} (this build reads {SCHEMA_VERSION})",
                sc.schema
            )));
        }
        if sc.dimension == 0 {
            return Err(build_err("dimension must be positive"));
        }
        Ok(sc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    fn point(&self, v: &[f64], what: &str) -> Result<Point, ScenarioError> {
        if v.len() != self.dimension {
            return Err(build_err(format!(
                "{what}: expected {} entries, got {}",
                self.dimension,
                v.len()
            )));
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(build_err(format!("{what}: entries must be finite")));
        }
        Ok(DVector::from_column_slice(v))
    }

    fn matrix(&self, rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, ScenarioError> {
        let n = self.dimension;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(build_err(format!("{what}: expected a {n}×{n} matrix")));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    fn domain(&self, spec: &DomainSpec, what: &str) -> Result<SmoothDomain, ScenarioError> {
        let built = match spec {
            DomainSpec::Ball { center, radius } => {
                SmoothDomain::ball(self.point(center, what)?, *radius)
            }
            DomainSpec::Ellipsoid { center, semi_axes } => {
                SmoothDomain::ellipsoid(self.point(center, what)?, semi_axes.clone())
            }
            DomainSpec::Capsule { a, b, ra, rb } => {
                SmoothDomain::round_cone(self.point(a, what)?, self.point(b, what)?, *ra, *rb)
            }
        };
        built.map_err(|e| build_err(format!("{what}: {e}")))
    }

    fn field(&self, spec: &FieldSpec, what: &str) -> Result<VectorField, ScenarioError> {
        match spec {
            FieldSpec::Constant { v } => Ok(VectorField::Constant { v: self.point(v, what)? }),
            FieldSpec::Linear { a, b } => Ok(VectorField::Linear {
                a: self.matrix(a, what)?,
                b: self.point(b, what)?,
            }),
        }
    }

    fn target_region(&self) -> Result<Option<TargetRegion>, ScenarioError> {
        self.target
            .as_ref()
            .map(|t| {
                Ok(TargetRegion { center: self.point(&t.center, "target.center")?, radius: t.radius })
            })
            .transpose()
    }

    fn ambient_region(&self) -> Result<Option<AmbientRegion>, ScenarioError> {
        self.ambient
            .as_ref()
            .map(|a| match a {
                AmbientSpec::Ball { center, radius } => Ok(AmbientRegion::Ball {
                    center: self.point(center, "ambient.center")?,
                    radius: *radius,
                }),
                AmbientSpec::Annulus { center, inner, outer } => Ok(AmbientRegion::Annulus {
                    center: self.point(center, "ambient.center")?,
                    inner: *inner,
                    outer: *outer,
                }),
            })
            .transpose()
    }

    /// Build the patchy field from the `patches` section.
    pub fn build_field(&self) -> Result<PatchyField, ScenarioError> {
        if self.patches.is_empty() {
            return Err(build_err("scenario has no patches section"));
        }
        let mut patches = Vec::with_capacity(self.patches.len());
        for p in &self.patches {
            let what = format!("patch {}", p.index);
            patches.push(Patch {
                index: PatchIndex(p.index),
                domain: self.domain(&p.domain, &what)?,
                field: self.field(&p.field, &what)?,
                margin: p.margin,
            });
        }
        let mut field =
            PatchyField::new(patches).map_err(|e| build_err(format!("patches: {e}")))?;
        if let Some(t) = self.target_region()? {
            field = field.with_target(t);
        }
        if let Some(a) = self.ambient_region()? {
            field = field.with_ambient(a);
        }
        Ok(field)
    }

    /// Build the feedback law from the `dynamics` + `feedback` sections.
    pub fn build_feedback(&self) -> Result<PatchyFeedback, ScenarioError> {
        let dyn_spec =
            self.dynamics.as_ref().ok_or_else(|| build_err("scenario has no dynamics section"))?;
        if self.feedback.is_empty() {
            return Err(build_err("scenario has no feedback patches"));
        }
        let dynamics = match dyn_spec {
            DynamicsSpec::ControlOnly => ControlDynamics::control_only(self.dimension),
            DynamicsSpec::Affine { a } => {
                ControlDynamics::affine(self.matrix(a, "dynamics.a")?, "f(x,u) = A·x + u")
            }
        };
        let mut patches = Vec::with_capacity(self.feedback.len());
        for p in &self.feedback {
            let what = format!("feedback patch {}", p.index);
            patches.push(FeedbackPatch {
                index: PatchIndex(p.index),
                domain: self.domain(&p.domain, &what)?,
                control: self.point(&p.control, &what)?,
            });
        }
        let mut fb = PatchyFeedback::new(dynamics, patches)
            .map_err(|e| build_err(format!("feedback: {e}")))?;
        if let Some(t) = self.target_region()? {
            fb = fb.with_target(t);
        }
        if let Some(a) = self.ambient_region()? {
            fb = fb.with_ambient(a);
        }
        Ok(fb)
    }

    /// The field to analyze: the explicit `patches` section when present,
    /// otherwise the closed loop of the feedback law.
    pub fn field_or_closed_loop(&self) -> Result<PatchyField, ScenarioError> {
        if !self.patches.is_empty() {
            self.build_field()
        } else if self.dynamics.is_some() {
            Ok(self.build_feedback()?.closed_loop())
        } else {
            Err(build_err("scenario has neither patches nor dynamics+feedback"))
        }
    }

    fn signal_spec(&self, name: &str) -> Result<&SignalSpec, ScenarioError> {
        self.signals
            .get(name)
            .ok_or_else(|| build_err(format!("signal '{name}' is not defined in signals")))
    }

    fn ac_piece(&self, spec: &AcPieceSpec, what: &str) -> Result<AcPiece, ScenarioError> {
        let (t0, t1) = spec.span();
        let kind = match spec {
            AcPieceSpec::Constant { rate, .. } => AcKind::Constant { rate: self.point(rate, what)? },
            AcPieceSpec::Linear { rate0, rate1, .. } => AcKind::Linear {
                rate0: self.point(rate0, what)?,
                rate1: self.point(rate1, what)?,
            },
            AcPieceSpec::Sinusoid { amp, omega, phase, .. } => AcKind::Sinusoid {
                amp: self.point(amp, what)?,
                omega: *omega,
                phase: *phase,
            },
        };
        AcPiece::new(t0, t1, kind).map_err(|e| build_err(format!("{what}: {e}")))
    }

    /// Build a named signal as a bounded-variation input.
    pub fn build_signal(&self, name: &str) -> Result<BVSignal, ScenarioError> {
        let spec = self.signal_spec(name)?;
        let origin = match &spec.origin {
            Some(v) => self.point(v, &format!("signal '{name}' origin"))?,
            None => DVector::zeros(self.dimension),
        };
        let mut w = BVSignal::new(origin, spec.t0, spec.t_end);
        for j in &spec.jumps {
            let dw = self.point(&j.dw, &format!("signal '{name}' jump at t={}", j.t))?;
            w = w
                .with_jump(j.t, dw)
                .map_err(|e| build_err(format!("signal '{name}': {e}")))?;
        }
        for p in &spec.ac {
            let (a, b) = p.span();
            let what = format!("signal '{name}' ac piece [{a}, {b}]");
            let piece = self.ac_piece(p, &what)?;
            w = w.with_ac_piece(piece).map_err(|e| build_err(format!("{what}: {e}")))?;
        }
        Ok(w)
    }

    /// Build a named signal as a density-only disturbance; jumps are
    /// rejected because these inputs must be absolutely continuous.
    pub fn build_ac_signal(&self, name: &str) -> Result<AcSignal, ScenarioError> {
        let spec = self.signal_spec(name)?;
        if !spec.jumps.is_empty() {
            return Err(build_err(format!(
                "signal '{name}' has jumps; a density-only disturbance must not"
            )));
        }
        let mut sig = AcSignal::zero(self.dimension);
        for p in &spec.ac {
            let (a, b) = p.span();
            let what = format!("signal '{name}' ac piece [{a}, {b}]");
            let piece = self.ac_piece(p, &what)?;
            sig.push(piece).map_err(|e| build_err(format!("{what}: {e}")))?;
        }
        Ok(sig)
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.integrator.dt,
            event_tol: self.integrator.event_tol,
            max_events: self.integrator.max_events,
            rng_seed: self.integrator.seed,
        }
    }

    pub fn grid_points(&self, grid: &[Vec<f64>], what: &str) -> Result<Vec<Point>, ScenarioError> {
        grid.iter()
            .enumerate()
            .map(|(i, v)| self.point(v, &format!("{what}[{i}]")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1_json() -> String {
        r#"{
            "schema": 1,
            "dimension": 2,
            "patches": [
                {"index": 1,
                 "domain": {"kind": "ball", "center": [0.0, 0.0], "radius": 2.0},
                 "field": {"kind": "linear", "a": [[-1.0, 0.0], [0.0, -1.0]], "b": [0.0, 0.0]},
                 "margin": 0.5}
            ],
            "integrator": {"dt": 0.001, "event_tol": 1e-6, "seed": 0},
            "signals": {
                "w1": {"t0": 0.0, "t_end": 2.0,
                       "jumps": [{"t": 1.0, "dw": [0.1, 0.0]}],
                       "ac": [{"t0": 0.0, "t1": 1.0, "kind": "constant", "rate": [0.0, 0.01]}]}
            },
            "run": {"x0": [1.2, 0.0], "t0": 0.0, "t_end": 2.0, "w": "w1"}
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_builds_the_basic_scenario() {
        let sc = ScenarioFile::from_json(&s1_json()).unwrap();
        let field = sc.build_field().unwrap();
        assert_eq!(field.dim(), 2);
        assert_eq!(field.patches().len(), 1);
        let w = sc.build_signal("w1").unwrap();
        assert_eq!(w.jumps().len(), 1);
        assert!((w.total_variation_span() - 0.11).abs() < 1e-12);
        let cfg = sc.integrator();
        assert_eq!(cfg.dt, 1e-3);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let bad = s1_json().replace("\"dimension\"", "\"dimenzion\"");
        match ScenarioFile::from_json(&bad) {
            Err(ScenarioError::Parse { line, message, .. }) => {
                assert!(line >= 1);
                assert!(message.contains("dimenzion"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let bad = s1_json().replace("\"schema\": 1", "\"schema\": 99");
        assert!(matches!(ScenarioFile::from_json(&bad), Err(ScenarioError::Build(_))));
    }

    #[test]
    fn dimension_mismatches_name_the_offender() {
        let bad = s1_json().replace("[1.2, 0.0]", "[1.2, 0.0, 3.0]");
        let sc = ScenarioFile::from_json(&bad).unwrap();
        let err = sc.point(&sc.run.as_ref().unwrap().x0, "run.x0").unwrap_err();
        assert!(err.to_string().contains("run.x0"), "{err}");
    }

    #[test]
    fn ac_only_signals_refuse_jumps() {
        let sc = ScenarioFile::from_json(&s1_json()).unwrap();
        assert!(sc.build_ac_signal("w1").is_err());
        assert!(sc.build_signal("w1").is_ok());
        assert!(sc.build_signal("nope").is_err());
    }

    #[test]
    fn round_trips_through_its_own_writer() {
        let sc = ScenarioFile::from_json(&s1_json()).unwrap();
        let again = ScenarioFile::from_json(&sc.to_json()).unwrap();
        assert_eq!(again.dimension, sc.dimension);
        assert_eq!(again.signals.len(), sc.signals.len());
        assert_eq!(again.to_json(), sc.to_json());
    }

    #[test]
    fn feedback_sections_build_a_closed_loop() {
        let text = r#"{
            "schema": 1,
            "dimension": 2,
            "dynamics": {"kind": "affine", "a": [[-1.0, 0.0], [0.0, -1.0]]},
            "feedback": [
                {"index": 1,
                 "domain": {"kind": "ball", "center": [0.0, 0.0], "radius": 3.0},
                 "control": [0.0, 0.0]}
            ],
            "target": {"center": [0.0, 0.0], "radius": 0.5}
        }"#;
        let sc = ScenarioFile::from_json(text).unwrap();
        let fb = sc.build_feedback().unwrap();
        assert_eq!(fb.patches().len(), 1);
        let loop_field = sc.field_or_closed_loop().unwrap();
        assert!(loop_field.target().is_some());
        let x = DVector::from_column_slice(&[1.0, 1.0]);
        let g = loop_field.eval(&x).unwrap();
        assert_eq!(g, -&x);
    }
}
