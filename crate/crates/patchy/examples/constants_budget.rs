//! Robustness constants estimated from a scenario, and the excess budget.
//!
//! From boundary-collar samples the field estimates one uniform inward bound
//! c′, a cross-patch coupling bound c″, and from them a ladder of
//! coefficients (C_i, ℓ_i) that price how long a perturbed run can dwell
//! above its monotone envelope: excess ≤ C_big · TotVar(w) whenever
//! TotVar(w) stays below the admissible budget δ. The same estimates yield
//! the sample-and-hold bounds k̄ (error gain) and δ̄ (period).

use std::path::Path;

use patchy::analyze::{check_prop22_budget, monotone_partition, BudgetOutcome};
use patchy::integrate::solve_impulsive;
use patchy::scenario::ScenarioFile;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/s2.json");
    let sc = ScenarioFile::load(&path).expect("bundled scenario parses");
    let field = sc.field_or_closed_loop().expect("scenario builds");
    let cspec = sc.constants.clone().expect("scenario has a constants section");

    let consts = field
        .estimate_constants(cspec.rho_bar, cspec.sample_budget)
        .expect("collars are inward");

    println!("collar width rho_bar = {}", consts.rho_bar);
    println!("  c'  (uniform inward bound)    = {:.6}", consts.c_prime);
    println!("  c'' (cross-patch coupling)    = {:.6}", consts.c_double_prime);
    println!("  ladder C_i = {:?}", consts.c_i);
    println!("  ladder l_i = {:?}", consts.ell_i);
    println!("  admissible variation delta    = {:.6}", consts.delta);
    println!("  excess budget factor C_big    = {:.6}", consts.c_big);
    println!("  sup |g| over padded patches M = {:.6}", consts.m_sup);
    println!("  sampling error gain k_bar     = {:.6}", consts.k_bar);
    println!("  sampling period bound         = {:.6}", consts.delta_bar);

    // price an actual perturbed run against the budget
    let run = sc.run.clone().expect("run section");
    let x0 = sc.grid_points(std::slice::from_ref(&run.x0), "run.x0").expect("x0 parses")[0].clone();
    let study = sc.study.clone().and_then(|s| s.prop22).expect("prop22 study present");
    let w = sc.build_signal(&study.w).expect("signal builds");
    let cfg = sc.integrator();
    let (t0, t_end) = w.span();

    let y = solve_impulsive(&field, &w, &x0, t0, t_end, &cfg).expect("flow stays inside");
    let part = monotone_partition(&y, &field);
    let check = check_prop22_budget(&part, &w, &consts);

    let tv = w.total_variation_span();
    println!("\nrun with TotVar(w) = {tv}:");
    println!("  excess measure = {:.6}", part.excess_measure);
    println!("  budget C_big·TV = {:.6}", consts.c_big * tv);
    println!("  verdict: {:?}", check);
    assert_eq!(check, BudgetOutcome::Holds);
    println!("(inputs with TV ≥ delta = {:.4} would be reported inconclusive)", consts.delta);
}
