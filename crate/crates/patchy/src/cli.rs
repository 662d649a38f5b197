//! Command-line front end: validate fields, run solvers, execute studies,
//! and emit machine-readable artifacts.
//!
//! Exit codes: 0 = pass, 1 = predicate/validation failure, 2 = parse or
//! configuration error, 3 = the trajectory left every patch domain.
//! Output files are written atomically (temp file + rename) and are
//! byte-identical for a fixed scenario + seed regardless of the worker
//! count (cap it with the `PATCHY_THREADS` environment variable).

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analyze::{
    build_sampling_plan, check_prop22_budget, convergence_pass, convergence_study,
    invariance_checks, monotone_partition, robustness_run, sampling_robustness_run, BudgetOutcome,
    ErrorProfile, RobustnessReport,
};
use crate::bvsignal::{AcSignal, BVSignal};
use crate::integrate::{
    solve_caratheodory, solve_impulsive, solve_perturbed_feedback, solve_sampling, EventKind,
    SolveError, Trajectory,
};
use crate::patchfield::PatchIndex;
use crate::scenario::ScenarioFile;

const EXIT_PASS: i32 = 0;
const EXIT_FAIL: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_ESCAPE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "patchy",
    version,
    about = "Patchy vector fields: validation, discontinuous-ODE solvers, and robustness studies"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the inward-pointing condition of every patch boundary
    Validate {
        /// scenario file (JSON)
        path: PathBuf,
        /// report destination (default: <scenario>.report.json)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate one trajectory and export it as CSV
    Run {
        /// scenario file (JSON)
        path: PathBuf,
        /// solution notion to integrate
        #[arg(long, value_enum)]
        mode: RunMode,
        /// trajectory destination (default: <scenario>.trajectory.csv)
        #[arg(long)]
        out: Option<PathBuf>,
        /// override the scenario's RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// override the scenario's time step
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Execute a batch study and write its artifact
    Study {
        /// scenario file (JSON)
        path: PathBuf,
        /// which study to execute
        #[arg(long, value_enum)]
        study: StudyKind,
        /// artifact destination (default: <scenario>.<study>.{csv,json})
        #[arg(long)]
        out: Option<PathBuf>,
        /// override the scenario's RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// override the scenario's time step
        #[arg(long)]
        dt: Option<f64>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum RunMode {
    /// selected-field flow without perturbation
    Carath,
    /// flow driven by a bounded-variation input (jumps + density)
    Impulsive,
    /// closed loop under measurement noise and disturbance
    Feedback,
    /// sample-and-hold loop on a seeded time partition
    Sampling,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    /// distances to the unperturbed solution set across a TV sweep
    Convergence,
    /// excess-measure budget check of the monotone partition
    Prop22,
    /// perturbed-feedback reach/containment sweep
    Robust,
    /// sample-and-hold reach/containment/monotonicity sweep
    Sampling,
    /// inset invariance and entry-time estimates for one patch
    Invariance,
}

/// Run the CLI against the given argument list and return its exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_threads();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.cmd {
        Cmd::Validate { path, out } => cmd_validate(&path, out.as_deref()),
        Cmd::Run { path, mode, out, seed, dt } => cmd_run(&path, mode, out.as_deref(), seed, dt),
        Cmd::Study { path, study, out, seed, dt } => {
            cmd_study(&path, study, out.as_deref(), seed, dt)
        }
    }
}

/// Cap the worker pool from `PATCHY_THREADS` (first call wins; later calls
/// and unset/invalid values leave the default pool).
fn init_threads() {
    if let Ok(v) = std::env::var("PATCHY_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring invalid PATCHY_THREADS={v:?}"),
        }
    }
}

fn config_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_CONFIG
}

fn default_out(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Write atomically: a temp file in the destination directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_or_config_err(path: &Path, contents: &str) -> Option<i32> {
    match write_atomic(path, contents) {
        Ok(()) => None,
        Err(e) => Some(config_error(format_args!("cannot write {}: {e}", path.display()))),
    }
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

/// Trajectory rows as `t,x1..xn,alpha,event` with `event` one of
/// `-`, `switch`, `jump`, `exit`. States at jump rows are left limits.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.states.first().map(|s| s.len()).unwrap_or(0);
    let mut out = String::from("t");
    for i in 1..=dim {
        out.push_str(&format!(",x{i}"));
    }
    out.push_str(",alpha,event\n");

    let label = |t: f64| -> &'static str {
        let mut best = 0u8;
        for ev in &traj.events {
            if ev.time == t {
                let rank = match ev.kind {
                    EventKind::Start => 0,
                    EventKind::Switch => 1,
                    EventKind::Jump => 2,
                    EventKind::Exit => 3,
                };
                best = best.max(rank);
            }
        }
        match best {
            1 => "switch",
            2 => "jump",
            3 => "exit",
            _ => "-",
        }
    };

    for (k, &t) in traj.times.iter().enumerate() {
        out.push_str(&format!("{t}"));
        for v in traj.states[k].iter() {
            out.push_str(&format!(",{v}"));
        }
        let alpha = if traj.active.is_empty() {
            0
        } else {
            traj.active[k.min(traj.active.len() - 1)].0
        };
        out.push_str(&format!(",{alpha},{}\n", label(t)));
    }
    out
}

/// Convergence table as `tv,distance` rows.
pub fn convergence_csv(table: &[(f64, f64)]) -> String {
    let mut out = String::from("tv,distance\n");
    for &(tv, d) in table {
        out.push_str(&format!("{tv},{d}\n"));
    }
    out
}

/// Robustness sweep as `x0_1..x0_n,reached,t_hit,monotone` rows; `t_hit`
/// is empty when the target was never reached.
pub fn robustness_csv(report: &RobustnessReport) -> String {
    let dim = report.outcomes.first().map(|o| o.x0.len()).unwrap_or(0);
    let mut out = String::new();
    for i in 1..=dim {
        out.push_str(&format!("x0_{i},"));
    }
    out.push_str("reached,t_hit,monotone\n");
    for o in &report.outcomes {
        for v in &o.x0 {
            out.push_str(&format!("{v},"));
        }
        let t_hit = o.t_hit.map(|t| t.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{t_hit},{}\n", o.reached_target, o.index_monotone));
    }
    out
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(path: &Path, out: Option<&Path>) -> i32 {
    let sc = match ScenarioFile::load(path) {
        Ok(sc) => sc,
        Err(e) => return config_error(e),
    };
    let field = match sc.field_or_closed_loop() {
        Ok(f) => f,
        Err(e) => return config_error(e),
    };
    let vspec = sc.validate.clone().unwrap_or_default();
    let report = field.validate(vspec.samples_per_boundary, vspec.chi);
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| default_out(path, "report.json"));
    if let Some(code) = write_or_config_err(&out, &text) {
        return code;
    }
    for p in &report.per_patch {
        let verdict = if p.worst_inner_product < 0.0 { "inward" } else { "VIOLATES" };
        println!(
            "patch {}: worst inner product {:.6} at chi={} ({verdict})",
            p.index, p.worst_inner_product, report.chi
        );
    }
    println!("validate: {} -> {}", if report.passes { "pass" } else { "fail" }, out.display());
    if report.passes {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn cmd_run(path: &Path, mode: RunMode, out: Option<&Path>, seed: Option<u64>, dt: Option<f64>) -> i32 {
    let sc = match ScenarioFile::load(path) {
        Ok(sc) => sc,
        Err(e) => return config_error(e),
    };
    let mut cfg = sc.integrator();
    if let Some(s) = seed {
        cfg.rng_seed = s;
    }
    if let Some(h) = dt {
        cfg.dt = h;
    }
    if !(cfg.dt > 0.0) {
        return config_error(format_args!("dt must be positive, got {}", cfg.dt));
    }
    let Some(run) = sc.run.clone() else {
        return config_error("scenario has no run section");
    };
    let x0 = match sc.grid_points(std::slice::from_ref(&run.x0), "run.x0") {
        Ok(mut v) => v.pop().expect("one point"),
        Err(e) => return config_error(e),
    };

    let result: Result<Trajectory, SolveError> = match mode {
        RunMode::Carath => match sc.field_or_closed_loop() {
            Ok(field) => solve_caratheodory(&field, &x0, run.t0, run.t_end, &cfg),
            Err(e) => return config_error(e),
        },
        RunMode::Impulsive => {
            let field = match sc.field_or_closed_loop() {
                Ok(f) => f,
                Err(e) => return config_error(e),
            };
            let w = match &run.w {
                Some(name) => match sc.build_signal(name) {
                    Ok(w) => w,
                    Err(e) => return config_error(e),
                },
                None => BVSignal::zero(sc.dimension, run.t0, run.t_end),
            };
            solve_impulsive(&field, &w, &x0, run.t0, run.t_end, &cfg)
        }
        RunMode::Feedback => {
            let fb = match sc.build_feedback() {
                Ok(f) => f,
                Err(e) => return config_error(e),
            };
            let zeta = match &run.zeta {
                Some(name) => match sc.build_signal(name) {
                    Ok(z) => z,
                    Err(e) => return config_error(e),
                },
                None => BVSignal::zero(sc.dimension, run.t0, run.t_end),
            };
            let d = match &run.d {
                Some(name) => match sc.build_ac_signal(name) {
                    Ok(d) => d,
                    Err(e) => return config_error(e),
                },
                None => AcSignal::zero(sc.dimension),
            };
            solve_perturbed_feedback(&fb, &zeta, &d, &x0, run.t_end, &cfg)
        }
        RunMode::Sampling => {
            let fb = match sc.build_feedback() {
                Ok(f) => f,
                Err(e) => return config_error(e),
            };
            let Some(plan_spec) = run.plan.clone() else {
                return config_error("sampling mode needs a run.plan section");
            };
            let profile = plan_spec.error.unwrap_or(ErrorProfile::Zero);
            let plan = match build_sampling_plan(
                run.t0,
                run.t_end,
                plan_spec.delta,
                plan_spec.k_bar,
                &profile,
                sc.dimension,
                plan_spec.seed.unwrap_or(cfg.rng_seed),
            ) {
                Ok(p) => p,
                Err(e) => return config_error(e),
            };
            let d = match &run.d {
                Some(name) => match sc.build_ac_signal(name) {
                    Ok(d) => d,
                    Err(e) => return config_error(e),
                },
                None => AcSignal::zero(sc.dimension),
            };
            solve_sampling(&fb, &plan, &d, &x0, &cfg)
        }
    };

    let out = out.map(Path::to_path_buf).unwrap_or_else(|| default_out(path, "trajectory.csv"));
    let finish = |traj: &Trajectory, code: i32, note: &str| -> i32 {
        if let Some(err_code) = write_or_config_err(&out, &trajectory_csv(traj)) {
            return err_code;
        }
        println!(
            "run: {note}, {} rows, {} events -> {}",
            traj.times.len(),
            traj.events.len(),
            out.display()
        );
        code
    };
    match result {
        Ok(traj) => finish(&traj, EXIT_PASS, "ok"),
        Err(SolveError::OutsideDomain { time, partial }) => {
            eprintln!("trajectory left every patch at t={time}");
            finish(&partial, EXIT_ESCAPE, "left the domain")
        }
        Err(SolveError::EventOverflow { time, max, partial }) => {
            eprintln!("more than {max} events by t={time}");
            finish(&partial, EXIT_FAIL, "event overflow")
        }
        Err(e @ (SolveError::BadConfig(_) | SolveError::Field(_))) => config_error(e),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}

// ---------------------------------------------------------------------------
// study
// ---------------------------------------------------------------------------

/// Artifact of the excess-budget study; `status` is `holds` / `violated`,
/// or `inconclusive` when the input variation exceeds the admissible δ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BudgetArtifact {
    pub status: BudgetOutcome,
    pub tv: f64,
    pub delta: f64,
    pub excess_measure: f64,
    pub c_big: f64,
    pub budget: f64,
    pub taus: Vec<f64>,
    pub indices: Vec<i64>,
}

fn cmd_study(
    path: &Path,
    study: StudyKind,
    out: Option<&Path>,
    seed: Option<u64>,
    dt: Option<f64>,
) -> i32 {
    let sc = match ScenarioFile::load(path) {
        Ok(sc) => sc,
        Err(e) => return config_error(e),
    };
    let mut cfg = sc.integrator();
    if let Some(s) = seed {
        cfg.rng_seed = s;
    }
    if let Some(h) = dt {
        cfg.dt = h;
    }
    if !(cfg.dt > 0.0) {
        return config_error(format_args!("dt must be positive, got {}", cfg.dt));
    }
    let study_spec = sc.study.clone().unwrap_or_default();

    match study {
        StudyKind::Convergence => {
            let Some(spec) = study_spec.convergence else {
                return config_error("scenario has no study.convergence section");
            };
            let field = match sc.field_or_closed_loop() {
                Ok(f) => f,
                Err(e) => return config_error(e),
            };
            let x0 = match sc.grid_points(std::slice::from_ref(&spec.x0), "study.convergence.x0") {
                Ok(mut v) => v.pop().expect("one point"),
                Err(e) => return config_error(e),
            };
            let profile = match sc.build_signal(&spec.profile) {
                Ok(w) => w,
                Err(e) => return config_error(e),
            };
            let table = match convergence_study(&field, &x0, &spec.tv_sequence, &profile, &cfg) {
                Ok(t) => t,
                Err(SolveError::OutsideDomain { time, .. }) => {
                    eprintln!("trajectory left every patch at t={time}");
                    return EXIT_ESCAPE;
                }
                Err(e) => return config_error(e),
            };
            let out =
                out.map(Path::to_path_buf).unwrap_or_else(|| default_out(path, "convergence.csv"));
            if let Some(code) = write_or_config_err(&out, &convergence_csv(&table)) {
                return code;
            }
            let pass = convergence_pass(&table);
            println!(
                "convergence: {} over {} variations -> {}",
                if pass { "pass" } else { "fail" },
                table.len(),
                out.display()
            );
            if pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        StudyKind::Prop22 => {
            let Some(spec) = study_spec.prop22 else {
                return config_error("scenario has no study.prop22 section");
            };
            let Some(consts_spec) = sc.constants.clone() else {
                return config_error("the budget study needs a constants section");
            };
            let field = match sc.field_or_closed_loop() {
                Ok(f) => f,
                Err(e) => return config_error(e),
            };
            let x0 = match sc.grid_points(std::slice::from_ref(&spec.x0), "study.prop22.x0") {
                Ok(mut v) => v.pop().expect("one point"),
                Err(e) => return config_error(e),
            };
            let w = match sc.build_signal(&spec.w) {
                Ok(w) => w,
                Err(e) => return config_error(e),
            };
            let consts =
                match field.estimate_constants(consts_spec.rho_bar, consts_spec.sample_budget) {
                    Ok(c) => c,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return EXIT_FAIL;
                    }
                };
            let (t0, t_end) = w.span();
            let y = match solve_impulsive(&field, &w, &x0, t0, t_end, &cfg) {
                Ok(y) => y,
                Err(SolveError::OutsideDomain { time, .. }) => {
                    eprintln!("trajectory left every patch at t={time}");
                    return EXIT_ESCAPE;
                }
                Err(e) => return config_error(e),
            };
            let part = monotone_partition(&y, &field);
            let status = check_prop22_budget(&part, &w, &consts);
            let tv = w.total_variation_span();
            let artifact = BudgetArtifact {
                status,
                tv,
                delta: consts.delta,
                excess_measure: part.excess_measure,
                c_big: consts.c_big,
                budget: consts.c_big * tv,
                taus: part.taus.clone(),
                indices: part.indices.iter().map(|i| i.0).collect(),
            };
            let mut text = serde_json::to_string_pretty(&artifact).expect("artifact serializes");
            text.push('\n');
            let out = out.map(Path::to_path_buf).unwrap_or_else(|| default_out(path, "prop22.json"));
            if let Some(code) = write_or_config_err(&out, &text) {
                return code;
            }
            println!(
                "budget: status={} excess={} budget={} -> {}",
                serde_json::to_string(&artifact.status).expect("status serializes"),
                artifact.excess_measure,
                artifact.budget,
                out.display()
            );
            if status == BudgetOutcome::Violated {
                EXIT_FAIL
            } else {
                EXIT_PASS
            }
        }
        StudyKind::Robust => {
            let Some(spec) = study_spec.robust else {
                return config_error("scenario has no study.robust section");
            };
            let fb = match sc.build_feedback() {
                Ok(f) => f,
                Err(e) => return config_error(e),
            };
            let grid = match sc.grid_points(&spec.initial_grid, "study.robust.initial_grid") {
                Ok(g) => g,
                Err(e) => return config_error(e),
            };
            let mut zeta = Vec::new();
            for name in &spec.zeta {
                match sc.build_signal(name) {
                    Ok(z) => zeta.push(z),
                    Err(e) => return config_error(e),
                }
            }
            let mut d = Vec::new();
            for name in &spec.d {
                match sc.build_ac_signal(name) {
                    Ok(sig) => d.push(sig),
                    Err(e) => return config_error(e),
                }
            }
            if zeta.len() != d.len() {
                return config_error("study.robust.zeta and study.robust.d must pair up");
            }
            let report = robustness_run(
                &fb, spec.r, spec.s, spec.chi, &grid, &zeta, &d, spec.t_end, &cfg,
            );
            finish_sweep(path, out, "robust.csv", &report)
        }
        StudyKind::Sampling => {
            let Some(spec) = study_spec.sampling else {
                return config_error("scenario has no study.sampling section");
            };
            let fb = match sc.build_feedback() {
                Ok(f) => f,
                Err(e) => return config_error(e),
            };
            let grid = match sc.grid_points(&spec.initial_grid, "study.sampling.initial_grid") {
                Ok(g) => g,
                Err(e) => return config_error(e),
            };
            let mut d = Vec::new();
            for name in &spec.d {
                match sc.build_ac_signal(name) {
                    Ok(sig) => d.push(sig),
                    Err(e) => return config_error(e),
                }
            }
            if spec.errors.len() != d.len() {
                return config_error("study.sampling.errors and study.sampling.d must pair up");
            }
            let report = sampling_robustness_run(
                &fb,
                spec.r,
                spec.s,
                spec.chi,
                spec.delta,
                spec.k_bar,
                &grid,
                &spec.errors,
                &d,
                spec.t_end,
                &cfg,
            );
            finish_sweep(path, out, "sampling.csv", &report)
        }
        StudyKind::Invariance => {
            let Some(spec) = study_spec.invariance else {
                return config_error("scenario has no study.invariance section");
            };
            let field = match sc.field_or_closed_loop() {
                Ok(f) => f,
                Err(e) => return config_error(e),
            };
            let Some(patch) = field.patch(PatchIndex(spec.patch_index)) else {
                return config_error(format_args!("no patch with index {}", spec.patch_index));
            };
            let report =
                invariance_checks(patch, spec.rho, spec.chi, spec.sample_budget, spec.t_end, &cfg);
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            let out =
                out.map(Path::to_path_buf).unwrap_or_else(|| default_out(path, "invariance.json"));
            if let Some(code) = write_or_config_err(&out, &text) {
                return code;
            }
            println!(
                "invariance: {} (stay {}, entry {}, transit est {:.4}) -> {}",
                if report.pass { "pass" } else { "fail" },
                report.stay_pass,
                report.entry_pass,
                report.c_transit_estimate,
                out.display()
            );
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
    }
}

fn finish_sweep(path: &Path, out: Option<&Path>, suffix: &str, report: &RobustnessReport) -> i32 {
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| default_out(path, suffix));
    if let Some(code) = write_or_config_err(&out, &robustness_csv(report)) {
        return code;
    }
    for o in report.outcomes.iter().filter(|o| {
        !(o.reached_target && o.stayed_in_domain && (!report.require_monotone || o.index_monotone))
    }) {
        println!(
            "failing cell x0={:?}: reached={} stayed={} monotone={}",
            o.x0, o.reached_target, o.stayed_in_domain, o.index_monotone
        );
    }
    println!(
        "{}: {} ({}/{} cells reached) -> {}",
        report.scenario,
        if report.pass { "pass" } else { "fail" },
        report.outcomes.iter().filter(|o| o.reached_target).count(),
        report.outcomes.len(),
        out.display()
    );
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_scenario(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn s1_text() -> &'static str {
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
                "w1": {"t0": 0.0, "t_end": 2.0, "jumps": [{"t": 1.0, "dw": [0.1, 0.0]}]}
            },
            "run": {"x0": [1.2, 0.0], "t0": 0.0, "t_end": 2.0, "w": "w1"}
        }"#
    }

    #[test]
    fn validate_and_run_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let sc = write_scenario(dir.path(), "s1.json", s1_text());
        let report = dir.path().join("report.json");
        let code = run([
            "patchy".to_string(),
            "validate".into(),
            sc.display().to_string(),
            "--out".into(),
            report.display().to_string(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&report).unwrap();
        let parsed: crate::patchfield::ValidationReport = serde_json::from_str(&text).unwrap();
        assert!(parsed.passes);

        let csv = dir.path().join("traj.csv");
        let code = run([
            "patchy".to_string(),
            "run".into(),
            sc.display().to_string(),
            "--mode".into(),
            "carath".into(),
            "--out".into(),
            csv.display().to_string(),
        ]);
        assert_eq!(code, 0);
        let body = std::fs::read_to_string(&csv).unwrap();
        let last = body.lines().last().unwrap();
        let cols: Vec<&str> = last.split(',').collect();
        assert_eq!(cols.len(), 5);
        let x1: f64 = cols[1].parse().unwrap();
        assert!((x1 - 1.2 * (-2.0f64).exp()).abs() < 1e-6, "{last}");
        assert!(body.lines().nth(1).unwrap().ends_with(",1,-"));
    }

    #[test]
    fn impulsive_run_logs_the_jump_row() {
        let dir = tempfile::tempdir().unwrap();
        let sc = write_scenario(dir.path(), "s1.json", s1_text());
        let csv = dir.path().join("traj.csv");
        let code = run([
            "patchy".to_string(),
            "run".into(),
            sc.display().to_string(),
            "--mode".into(),
            "impulsive".into(),
            "--out".into(),
            csv.display().to_string(),
        ]);
        assert_eq!(code, 0);
        let body = std::fs::read_to_string(&csv).unwrap();
        let jump_row = body.lines().find(|l| l.ends_with(",jump")).expect("a jump row");
        assert!(jump_row.starts_with("1,"), "{jump_row}");
    }

    #[test]
    fn malformed_and_misconfigured_files_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let bad = write_scenario(dir.path(), "bad.json", "{ not json");
        assert_eq!(run(["patchy", "validate", bad.to_str().unwrap()]), 2);

        // sampling without a plan section is a config error
        let sc = write_scenario(
            dir.path(),
            "fb.json",
            r#"{
                "schema": 1,
                "dimension": 2,
                "dynamics": {"kind": "affine", "a": [[-1.0, 0.0], [0.0, -1.0]]},
                "feedback": [
                    {"index": 1,
                     "domain": {"kind": "ball", "center": [0.0, 0.0], "radius": 3.0},
                     "control": [0.0, 0.0]}
                ],
                "run": {"x0": [1.0, 0.0], "t_end": 2.0}
            }"#,
        );
        assert_eq!(run(["patchy", "run", sc.to_str().unwrap(), "--mode", "sampling"]), 2);
        // unknown study section
        assert_eq!(run(["patchy", "study", sc.to_str().unwrap(), "--study", "robust"]), 2);
    }

    #[test]
    fn outward_field_fails_validation_with_exit_1() {
        let dir = tempfile::tempdir().unwrap();
        let text = s1_text().replace("[[-1.0, 0.0], [0.0, -1.0]]", "[[1.0, 0.0], [0.0, 1.0]]");
        let sc = write_scenario(dir.path(), "s1_flipped.json", &text);
        let report = dir.path().join("report.json");
        let code = run([
            "patchy".to_string(),
            "validate".into(),
            sc.display().to_string(),
            "--out".into(),
            report.display().to_string(),
        ]);
        assert_eq!(code, 1);
        let parsed: crate::patchfield::ValidationReport =
            serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert!(!parsed.passes);
        assert_eq!(parsed.per_patch[0].index, 1);
        assert!(parsed.per_patch[0].worst_inner_product >= 0.0);
    }

    #[test]
    fn escape_exits_3_and_writes_the_partial_path() {
        let dir = tempfile::tempdir().unwrap();
        // jump ejects the state from the only patch at t=1
        let text = s1_text().replace("\"dw\": [0.1, 0.0]", "\"dw\": [5.0, 0.0]");
        let sc = write_scenario(dir.path(), "s1_eject.json", &text);
        let csv = dir.path().join("traj.csv");
        let code = run([
            "patchy".to_string(),
            "run".into(),
            sc.display().to_string(),
            "--mode".into(),
            "impulsive".into(),
            "--out".into(),
            csv.display().to_string(),
        ]);
        assert_eq!(code, 3);
        let body = std::fs::read_to_string(&csv).unwrap();
        assert!(body.lines().last().unwrap().ends_with(",exit"), "{body}");
    }

    #[test]
    fn convergence_study_writes_csv_and_passes() {
        let dir = tempfile::tempdir().unwrap();
        let text = r#"{
            "schema": 1,
            "dimension": 2,
            "patches": [
                {"index": 1,
                 "domain": {"kind": "ball", "center": [0.0, 0.0], "radius": 2.0},
                 "field": {"kind": "linear", "a": [[-1.0, 0.0], [0.0, -1.0]], "b": [0.0, 0.0]},
                 "margin": 0.5}
            ],
            "integrator": {"dt": 0.001},
            "signals": {
                "w1": {"t0": 0.0, "t_end": 2.0, "jumps": [{"t": 1.0, "dw": [1.0, 0.0]}]}
            },
            "study": {"convergence": {"x0": [1.0, 0.0], "tv_sequence": [0.1, 0.01], "profile": "w1"}}
        }"#;
        let sc = write_scenario(dir.path(), "s1_conv.json", text);
        let csv = dir.path().join("conv.csv");
        let code = run([
            "patchy".to_string(),
            "study".into(),
            sc.display().to_string(),
            "--study".into(),
            "convergence".into(),
            "--out".into(),
            csv.display().to_string(),
        ]);
        assert_eq!(code, 0);
        let body = std::fs::read_to_string(&csv).unwrap();
        assert!(body.starts_with("tv,distance\n"));
        assert_eq!(body.lines().count(), 3);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["patchy", "--help"]), 0);
        assert_eq!(run(["patchy", "run", "--help"]), 0);
    }
}
