//! Run every gallery scenario and compare the outcome against its declared
//! expectation: the gallery is executable documentation, including the
//! negative controls that must fail in exactly one place.
//!
//! Run with `cargo run -p riemap --example gallery_tour`.

use riemap::checks::outcome_mismatches;
use riemap::gallery::{builtin_scenario, entries};

fn main() -> riemap::Result<()> {
    let mut all_matched = true;
    for entry in entries() {
        let scenario = builtin_scenario(entry.name)?.compile()?;
        let report = scenario.run_suite()?;
        let mismatches = outcome_mismatches(&report, &scenario.expected);
        let verdict = if mismatches.is_empty() {
            "as expected"
        } else {
            all_matched = false;
            "MISMATCH"
        };
        println!(
            "{:<20} overall={:<15} {}",
            entry.name,
            report.overall.name(),
            verdict
        );
        for m in mismatches {
            println!("    {m}");
        }
    }
    if all_matched {
        println!("\nevery scenario reproduced its declared outcome");
    }
    Ok(())
}
