//! Report rendering: a byte-deterministic machine-readable JSON document and
//! a human-readable summary table.
//!
//! Numbers are written with 17 significant digits so identical runs produce
//! byte-identical, diffable files. Timestamps are opt-in and excluded from
//! the determinism contract.

use crate::checks::{CheckAggregate, CheckReport};
use std::fmt::Write as _;

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "null".to_string();
    }
    if x.is_infinite() {
        let clamped = if x > 0.0 { f64::MAX } else { f64::MIN };
        return format!("{clamped:.16e}");
    }
    format!("{x:.16e}")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn point_json(point: &[f64]) -> String {
    let coords: Vec<String> = point.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", coords.join(", "))
}

fn check_json(agg: &CheckAggregate, indent: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{indent}{{");
    let _ = writeln!(s, "{indent}  \"check\": \"{}\",", agg.check.name());
    let _ = writeln!(s, "{indent}  \"status\": \"{}\",", agg.status.name());
    match &agg.reason {
        Some(reason) => {
            let _ = writeln!(s, "{indent}  \"reason\": \"{}\",", escape(reason));
        }
        None => {
            let _ = writeln!(s, "{indent}  \"reason\": null,");
        }
    }
    let _ = writeln!(s, "{indent}  \"max_residual\": {},", fmt_f64(agg.max_residual));
    let _ = writeln!(s, "{indent}  \"mean_residual\": {},", fmt_f64(agg.mean_residual));
    let _ = writeln!(s, "{indent}  \"max_scale\": {},", fmt_f64(agg.max_scale));
    let _ = writeln!(s, "{indent}  \"pass_count\": {},", agg.pass_count);
    let _ = writeln!(s, "{indent}  \"total\": {},", agg.total);
    if agg.failures.is_empty() {
        let _ = writeln!(s, "{indent}  \"failures\": []");
    } else {
        let _ = writeln!(s, "{indent}  \"failures\": [");
        for (i, f) in agg.failures.iter().enumerate() {
            let comma = if i + 1 == agg.failures.len() { "" } else { "," };
            let _ = writeln!(
                s,
                "{indent}    {{\"point\": {}, \"residual\": {}, \"tolerance\": {}, \
                 \"details\": \"{}\"}}{comma}",
                point_json(&f.point),
                fmt_f64(f.residual),
                fmt_f64(f.tolerance),
                escape(&f.details)
            );
        }
        let _ = writeln!(s, "{indent}  ]");
    }
    let _ = write!(s, "{indent}}}");
    s
}

/// Serializes a report. The timestamp field is only present when
/// `timestamp` is supplied; deterministic output omits it.
pub fn write_json(report: &CheckReport, timestamp: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{{");
    let _ = writeln!(s, "  \"scenario\": \"{}\",", escape(&report.scenario));
    let _ = writeln!(s, "  \"mode\": \"{}\",", report.mode.name());
    let _ = writeln!(s, "  \"seed\": {},", report.seed);
    let _ = writeln!(s, "  \"points\": {},", report.point_count);
    let _ = writeln!(
        s,
        "  \"tolerances\": {{\"residual\": {}, \"rank\": {}, \"relative\": {}}},",
        fmt_f64(report.tolerances.residual),
        fmt_f64(report.tolerances.rank),
        fmt_f64(report.tolerances.relative)
    );
    let _ = writeln!(s, "  \"overall\": \"{}\",", report.overall.name());
    if report.warnings.is_empty() {
        let _ = writeln!(s, "  \"warnings\": [],");
    } else {
        let _ = writeln!(s, "  \"warnings\": [");
        for (i, w) in report.warnings.iter().enumerate() {
            let comma = if i + 1 == report.warnings.len() { "" } else { "," };
            let _ = writeln!(s, "    \"{}\"{comma}", escape(w));
        }
        let _ = writeln!(s, "  ],");
    }
    if let Some(ts) = timestamp {
        let _ = writeln!(s, "  \"timestamp\": \"{}\",", escape(ts));
    }
    let _ = writeln!(s, "  \"checks\": [");
    for (i, agg) in report.checks.iter().enumerate() {
        let comma = if i + 1 == report.checks.len() { "" } else { "," };
        let _ = writeln!(s, "{}{comma}", check_json(agg, "    "));
    }
    let _ = writeln!(s, "  ]");
    let _ = writeln!(s, "}}");
    s
}

/// Human-readable summary table.
pub fn render_table(report: &CheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scenario: {}   mode: {}   seed: {}   points: {}",
        report.scenario,
        report.mode.name(),
        report.seed,
        report.point_count
    );
    let _ = writeln!(
        s,
        "{:<24} {:<8} {:>13} {:>13} {:>9}",
        "check", "status", "max residual", "mean residual", "passed"
    );
    for agg in &report.checks {
        match agg.status {
            crate::checks::CheckStatus::Skipped => {
                let _ = writeln!(
                    s,
                    "{:<24} {:<8} {}",
                    agg.check.name(),
                    "SKIP",
                    agg.reason.as_deref().unwrap_or("")
                );
            }
            status => {
                let _ = writeln!(
                    s,
                    "{:<24} {:<8} {:>13.3e} {:>13.3e} {:>4}/{}",
                    agg.check.name(),
                    if status == crate::checks::CheckStatus::Pass {
                        "PASS"
                    } else {
                        "FAIL"
                    },
                    agg.max_residual,
                    agg.mean_residual,
                    agg.pass_count,
                    agg.total
                );
            }
        }
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(s, "overall: {}", report.overall.name());
    s
}
