//! Run the full identity-check suite on one scenario and inspect both the
//! summary table and the machine-readable report.
//!
//! Run with `cargo run -p riemap --example verify_identities`.

use riemap::gallery::builtin_scenario;
use riemap::report::{render_table, write_json};

fn main() -> riemap::Result<()> {
    let scenario = builtin_scenario("graph_with_kernel")?.compile()?;
    let report = scenario.run_suite()?;

    print!("{}", render_table(&report));

    // The JSON document is byte-deterministic for a fixed manifest, seed,
    // mode and tolerances; numbers carry 17 significant digits.
    let json = write_json(&report, None);
    let excerpt: String = json.lines().take(12).collect::<Vec<_>>().join("\n");
    println!("\nreport excerpt:\n{excerpt}\n  ...");

    // Aggregates are available programmatically as well.
    for agg in &report.checks {
        if agg.check.name() == "gauss_equation" {
            println!(
                "\ngauss_equation: max residual {:.3e} over {} points (scale {:.3e})",
                agg.max_residual, agg.total, agg.max_scale
            );
        }
    }
    Ok(())
}
