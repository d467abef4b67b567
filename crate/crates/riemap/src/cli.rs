//! Command-line runner: `check` runs a suite from a manifest file or gallery
//! entry, `gallery list` prints the built-in scenarios. Exit codes: 0 when
//! every check matches its expectation (skips allowed), 1 when any check
//! deviates, 2 for scenario or usage errors.

use crate::checks::outcome_mismatches;
use crate::error::Error;
use crate::expr::DerivMode;
use crate::gallery;
use crate::manifest::{load_manifest, SamplingSpec, ScenarioManifest, ToleranceSpec};
use crate::report::{render_table, write_json};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "riemap", version, about = "Numerical checks for Riemannian and holomorphic maps between charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a check suite from a manifest file or `gallery:<name>`
    Check {
        /// Path to a scenario manifest (JSON) or `gallery:<name>`
        scenario: String,
        /// Number of random sample points (forces random sampling)
        #[arg(long)]
        points: Option<usize>,
        /// Random sampling seed (forces random sampling)
        #[arg(long)]
        seed: Option<u64>,
        /// Absolute residual tolerance override
        #[arg(long)]
        tol: Option<f64>,
        /// Relative residual tolerance override
        #[arg(long = "rel-tol")]
        rel_tol: Option<f64>,
        /// Derivative mode: forward jets (ad) or finite differences (fd)
        #[arg(long, value_parser = ["ad", "fd"])]
        mode: Option<String>,
        /// Write the machine-readable JSON report to this path
        #[arg(long)]
        report: Option<PathBuf>,
        /// Comma-separated subset of checks to run
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Stamp the report with wall-clock time (excluded from the
        /// byte-determinism contract)
        #[arg(long)]
        timestamp: bool,
    },
    /// Inspect the built-in scenario gallery
    Gallery {
        #[command(subcommand)]
        command: GalleryCommand,
    },
}

#[derive(Subcommand)]
enum GalleryCommand {
    /// Print every gallery entry with its expected outcome
    List,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 2;
        }
    };
    match cli.command {
        Command::Check {
            scenario,
            points,
            seed,
            tol,
            rel_tol,
            mode,
            report,
            checks,
            timestamp,
        } => run_check(
            &scenario, points, seed, tol, rel_tol, mode, report, checks, timestamp,
        ),
        Command::Gallery {
            command: GalleryCommand::List,
        } => {
            print!("{}", gallery_listing());
            0
        }
    }
}

fn resolve_manifest(scenario: &str) -> Result<ScenarioManifest, Error> {
    if let Some(name) = scenario.strip_prefix("gallery:") {
        gallery::builtin_scenario(name)
    } else {
        let path = Path::new(scenario);
        if !path.exists() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("file not found: {scenario}"),
            )));
        }
        load_manifest(path)
    }
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    scenario: &str,
    points: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    rel_tol: Option<f64>,
    mode: Option<String>,
    report_path: Option<PathBuf>,
    checks: Option<Vec<String>>,
    timestamp: bool,
) -> i32 {
    let mut manifest = match resolve_manifest(scenario) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    if points.is_some() || seed.is_some() {
        let (old_count, old_seed, old_bounds) = match &manifest.sampling {
            SamplingSpec::Random {
                count,
                seed,
                bounds,
            } => (*count, *seed, bounds.clone()),
            SamplingSpec::Explicit { .. } => (100, 42, None),
        };
        manifest.sampling = SamplingSpec::Random {
            count: points.unwrap_or(old_count),
            seed: seed.unwrap_or(old_seed),
            bounds: old_bounds,
        };
    }
    if let Some(mode) = mode {
        manifest.mode = if mode == "fd" {
            DerivMode::FiniteDiff
        } else {
            DerivMode::Jets
        };
    }
    if tol.is_some() || rel_tol.is_some() {
        let mut spec = manifest.tolerances.unwrap_or_else(ToleranceSpec::default);
        if tol.is_some() {
            spec.residual = tol;
        }
        if rel_tol.is_some() {
            spec.relative = rel_tol;
        }
        manifest.tolerances = Some(spec);
    }
    if let Some(list) = checks {
        manifest.checks = Some(list);
    }

    let scenario = match manifest.compile() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let report = match scenario.run_suite() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    print!("{}", render_table(&report));

    let mismatches = outcome_mismatches(&report, &scenario.expected);
    if !scenario.expected.is_empty() {
        if mismatches.is_empty() {
            println!("expected outcome: matched");
        } else {
            for m in &mismatches {
                println!("expected outcome mismatch: {m}");
            }
        }
    } else {
        for m in &mismatches {
            println!("failure: {m}");
        }
    }

    if let Some(path) = report_path {
        let stamp = timestamp.then(|| {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            format!("unix:{secs}")
        });
        let json = write_json(&report, stamp.as_deref());
        if let Err(e) = std::fs::write(&path, json) {
            eprintln!("error: cannot write report to {}: {e}", path.display());
            return 2;
        }
    }

    if mismatches.is_empty() {
        0
    } else {
        1
    }
}

fn gallery_listing() -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for entry in gallery::entries() {
        let _ = writeln!(out, "{}", entry.name);
        let _ = writeln!(out, "  {}", entry.description);
        let _ = writeln!(out, "  note: {}", entry.literature_note);
        let non_pass: Vec<String> = entry
            .expected
            .iter()
            .filter(|(_, s)| **s != crate::checks::CheckStatus::Pass)
            .map(|(c, s)| format!("{}={}", c.name(), s.name()))
            .collect();
        if non_pass.is_empty() {
            let _ = writeln!(out, "  expected: all checks pass");
        } else {
            let _ = writeln!(out, "  expected: {}; all others pass", non_pass.join(", "));
        }
        let _ = writeln!(out);
    }
    out
}
