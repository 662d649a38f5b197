//! Inward-margin validation for the bundled scenarios.
//!
//! A patch passes when the field points strictly into the domain everywhere
//! on the boundary, except where a higher patch takes over or the declared
//! target region absorbs the outflow. The margin `chi` asks for slack: the
//! inner product with the outer normal must stay below `-chi` so that any
//! disturbance of norm up to `chi` cannot flip the sign.

use std::path::Path;

use patchy::scenario::ScenarioFile;

fn scenario(name: &str) -> ScenarioFile {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    ScenarioFile::load(&path).expect("bundled scenario parses")
}

fn main() {
    for name in ["s1.json", "s2.json", "s3.json", "tangency.json"] {
        let sc = scenario(name);
        let field = sc.field_or_closed_loop().expect("scenario builds");
        let vspec = sc.validate.clone().unwrap_or_default();
        let report = field.validate(vspec.samples_per_boundary, vspec.chi);

        println!("{name}: chi = {}, {} patches", report.chi, report.per_patch.len());
        for p in &report.per_patch {
            println!(
                "  patch {:>2}: worst inner product {:>9.5}  ({} boundary samples, {} exempt)  {}",
                p.index,
                p.worst_inner_product,
                p.samples_used,
                p.samples_excluded,
                if p.worst_inner_product < 0.0 { "inward" } else { "VIOLATES" }
            );
        }
        if let Some(frac) = report.cover_gap_fraction {
            println!("  ambient cover gap: {:.1}% of sampled ambient points", 100.0 * frac);
        }
        println!("  => {}\n", if report.passes { "PASS" } else { "FAIL" });
    }

    println!("note: tangency.json is a branching demo on purpose — its transport");
    println!("field exits the big disk's east rim, so validation must flag it.");
}
