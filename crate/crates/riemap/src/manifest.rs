//! Scenario manifests: the JSON description of a source chart, target chart,
//! map, sampling plan, check list and tolerances. Validation reports every
//! problem found, not just the first.

use crate::checks::{CheckId, CheckStatus, Sampling, Scenario, Tolerances};
use crate::error::{Error, Result};
use crate::expr::{DerivMode, ExprAst};
use crate::geometry::ChartManifold;
use crate::map::SmoothMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Chart description: coordinate names, metric grid, optional complex
/// structure grid, and the sampling domain box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub coords: Vec<String>,
    pub metric: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex_structure: Option<Vec<Vec<String>>>,
    pub domain_box: Vec<[f64; 2]>,
}

/// Point sampling: either an explicit list or a seeded uniform draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode")]
pub enum SamplingSpec {
    #[serde(rename = "random")]
    Random {
        count: usize,
        seed: u64,
        #[serde(
            default,
            rename = "box",
            skip_serializing_if = "Option::is_none"
        )]
        bounds: Option<Vec<[f64; 2]>>,
    },
    #[serde(rename = "explicit")]
    Explicit { points: Vec<Vec<f64>> },
}

/// Optional per-run tolerance overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative: Option<f64>,
}

/// The on-disk scenario format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub source: ManifoldSpec,
    pub target: ManifoldSpec,
    pub map: Vec<String>,
    /// Normal vector fields on the target (expressions in target
    /// coordinates) for the shape-operator check.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub normal_fields: Vec<Vec<String>>,
    pub sampling: SamplingSpec,
    /// Check names to run; omitted means the full registry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
    pub mode: DerivMode,
    /// Expected status per check for negative controls
    /// (`"pass"`, `"fail"`, `"skipped"`).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected: BTreeMap<String, String>,
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn validate_chart(spec: &ManifoldSpec, label: &str, errors: &mut Vec<String>) {
    let n = spec.coords.len();
    if n == 0 {
        errors.push(format!("{label}: no coordinates declared"));
        return;
    }
    for (i, c) in spec.coords.iter().enumerate() {
        if !is_identifier(c) {
            errors.push(format!("{label}.coords[{i}]: `{c}` is not a valid name"));
        }
        if crate::expr::reserved_names().contains(&c.as_str()) {
            errors.push(format!("{label}.coords[{i}]: `{c}` shadows a reserved name"));
        }
        if spec.coords[..i].contains(c) {
            errors.push(format!("{label}.coords[{i}]: duplicate coordinate `{c}`"));
        }
    }
    let check_grid = |grid: &[Vec<String>], what: &str, errors: &mut Vec<String>| {
        if grid.len() != n {
            errors.push(format!(
                "{label}.{what}: expected {n} rows, found {}",
                grid.len()
            ));
            return;
        }
        for (i, row) in grid.iter().enumerate() {
            if row.len() != n {
                errors.push(format!(
                    "{label}.{what}[{i}]: expected {n} entries, found {}",
                    row.len()
                ));
                continue;
            }
            for (j, entry) in row.iter().enumerate() {
                if let Err(e) = ExprAst::parse(entry, &spec.coords) {
                    errors.push(format!("{label}.{what}[{i}][{j}]: {e}"));
                }
            }
        }
    };
    check_grid(&spec.metric, "metric", errors);
    if let Some(j) = &spec.complex_structure {
        if n % 2 != 0 {
            errors.push(format!(
                "{label}: complex structure requires an even dimension, found {n}"
            ));
        }
        check_grid(j, "complex_structure", errors);
    }
    if spec.domain_box.len() != n {
        errors.push(format!(
            "{label}.domain_box: expected {n} intervals, found {}",
            spec.domain_box.len()
        ));
    }
    for (i, [lo, hi]) in spec.domain_box.iter().enumerate() {
        if !(lo < hi) {
            errors.push(format!(
                "{label}.domain_box[{i}]: [{lo}, {hi}] is not a nonempty interval"
            ));
        }
    }
}

impl ScenarioManifest {
    /// Every validation problem in the manifest; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.name.is_empty() {
            errors.push("name: must not be empty".to_string());
        }
        validate_chart(&self.source, "source", &mut errors);
        validate_chart(&self.target, "target", &mut errors);

        let m1 = self.source.coords.len();
        let m2 = self.target.coords.len();
        if self.map.len() != m2 {
            errors.push(format!(
                "map: expected {m2} components (target dimension), found {}",
                self.map.len()
            ));
        }
        for (i, comp) in self.map.iter().enumerate() {
            if let Err(e) = ExprAst::parse(comp, &self.source.coords) {
                errors.push(format!("map[{i}]: {e}"));
            }
        }
        for (fi, field) in self.normal_fields.iter().enumerate() {
            if field.len() != m2 {
                errors.push(format!(
                    "normal_fields[{fi}]: expected {m2} components, found {}",
                    field.len()
                ));
            }
            for (i, comp) in field.iter().enumerate() {
                if let Err(e) = ExprAst::parse(comp, &self.target.coords) {
                    errors.push(format!("normal_fields[{fi}][{i}]: {e}"));
                }
            }
        }
        match &self.sampling {
            SamplingSpec::Random { count, bounds, .. } => {
                if *count == 0 {
                    errors.push("sampling.count: must be at least 1".to_string());
                }
                if let Some(b) = bounds {
                    if b.len() != m1 {
                        errors.push(format!(
                            "sampling.box: expected {m1} intervals, found {}",
                            b.len()
                        ));
                    }
                    for (i, [lo, hi]) in b.iter().enumerate() {
                        if !(lo < hi) {
                            errors.push(format!(
                                "sampling.box[{i}]: [{lo}, {hi}] is not a nonempty interval"
                            ));
                        }
                    }
                }
            }
            SamplingSpec::Explicit { points } => {
                if points.is_empty() {
                    errors.push("sampling.points: must not be empty".to_string());
                }
                for (i, p) in points.iter().enumerate() {
                    if p.len() != m1 {
                        errors.push(format!(
                            "sampling.points[{i}]: expected {m1} entries, found {}",
                            p.len()
                        ));
                        continue;
                    }
                    let inside = p
                        .iter()
                        .zip(&self.source.domain_box)
                        .all(|(x, [lo, hi])| x >= lo && x <= hi);
                    if !inside {
                        errors.push(format!(
                            "sampling.points[{i}]: {p:?} lies outside the source domain box"
                        ));
                    }
                }
            }
        }
        if let Some(checks) = &self.checks {
            for name in checks {
                if let Err(e) = CheckId::from_name(name) {
                    errors.push(e.to_string());
                }
            }
        }
        for (name, status) in &self.expected {
            if let Err(e) = CheckId::from_name(name) {
                errors.push(format!("expected.{name}: {e}"));
            }
            if CheckStatus::from_name(status).is_none() {
                errors.push(format!(
                    "expected.{name}: `{status}` is not one of pass, fail, skipped"
                ));
            }
        }
        if let Some(tol) = &self.tolerances {
            for (label, value) in [
                ("residual", tol.residual),
                ("rank", tol.rank),
                ("relative", tol.relative),
            ] {
                if let Some(v) = value {
                    if !(v > 0.0) {
                        errors.push(format!("tolerances.{label}: must be positive, found {v}"));
                    }
                }
            }
        }
        errors
    }

    /// Builds the runnable scenario; fails with the full validation list.
    pub fn compile(&self) -> Result<Scenario> {
        let errors = self.validate();
        if !errors.is_empty() {
            return Err(Error::Manifest(errors));
        }
        let to_pairs = |b: &[[f64; 2]]| b.iter().map(|[lo, hi]| (*lo, *hi)).collect::<Vec<_>>();
        let source = ChartManifold::new(
            self.source.coords.clone(),
            &self.source.metric,
            self.source.complex_structure.as_deref(),
            to_pairs(&self.source.domain_box),
        )?;
        let target = ChartManifold::new(
            self.target.coords.clone(),
            &self.target.metric,
            self.target.complex_structure.as_deref(),
            to_pairs(&self.target.domain_box),
        )?;
        let map = SmoothMap::new(source, target, &self.map)?;
        let normal_fields = self
            .normal_fields
            .iter()
            .map(|field| {
                field
                    .iter()
                    .map(|comp| ExprAst::parse(comp, &self.target.coords))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let sampling = match &self.sampling {
            SamplingSpec::Random {
                count,
                seed,
                bounds,
            } => Sampling::Random {
                count: *count,
                seed: *seed,
                bounds: bounds.as_deref().map(to_pairs),
            },
            SamplingSpec::Explicit { points } => Sampling::Explicit(points.clone()),
        };
        let checks = match &self.checks {
            Some(names) => names
                .iter()
                .map(|n| CheckId::from_name(n))
                .collect::<Result<Vec<_>>>()?,
            None => CheckId::ALL.to_vec(),
        };
        let mut tolerances = Tolerances::defaults(self.mode);
        if let Some(spec) = &self.tolerances {
            if let Some(v) = spec.residual {
                tolerances.residual = v;
            }
            if let Some(v) = spec.rank {
                tolerances.rank = v;
            }
            if let Some(v) = spec.relative {
                tolerances.relative = v;
            }
        }
        let mut expected = BTreeMap::new();
        for (name, status) in &self.expected {
            expected.insert(
                CheckId::from_name(name)?,
                CheckStatus::from_name(status).expect("validated"),
            );
        }
        Ok(Scenario {
            name: self.name.clone(),
            description: self.description.clone(),
            map,
            normal_fields,
            sampling,
            checks,
            tolerances,
            mode: self.mode,
            expected,
            gate_hypotheses: true,
        })
    }
}

/// Reads and validates a manifest file.
pub fn load_manifest(path: &Path) -> Result<ScenarioManifest> {
    let text = std::fs::read_to_string(path)?;
    let manifest: ScenarioManifest = serde_json::from_str(&text)?;
    let errors = manifest.validate();
    if !errors.is_empty() {
        return Err(Error::Manifest(errors));
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn gallery_manifests_validate() {
        for entry in gallery::entries() {
            let manifest = gallery::builtin_scenario(entry.name).unwrap();
            let errors = manifest.validate();
            assert!(errors.is_empty(), "{}: {errors:?}", entry.name);
            manifest.compile().unwrap();
        }
    }

    #[test]
    fn dimension_mismatch_reported() {
        let mut manifest = gallery::builtin_scenario("paper_example").unwrap();
        manifest.map.pop();
        let errors = manifest.validate();
        assert!(
            errors.iter().any(|e| e.contains("map: expected 4")),
            "{errors:?}"
        );
    }

    #[test]
    fn unknown_check_listed_with_valid_names() {
        let mut manifest = gallery::builtin_scenario("paper_example").unwrap();
        manifest.checks = Some(vec!["lemma_9_9".to_string()]);
        let errors = manifest.validate();
        assert!(
            errors
                .iter()
                .any(|e| e.contains("lemma_9_9") && e.contains("gauss_equation")),
            "{errors:?}"
        );
    }

    #[test]
    fn all_errors_collected_not_just_first() {
        let mut manifest = gallery::builtin_scenario("paper_example").unwrap();
        manifest.map.pop(); // dimension error
        manifest.checks = Some(vec!["bogus".to_string()]); // unknown check
        manifest.source.metric[0][0] = "1 +".to_string(); // parse error
        let errors = manifest.validate();
        assert!(errors.len() >= 3, "{errors:?}");
    }

    #[test]
    fn manifest_round_trip() {
        let manifest = gallery::builtin_scenario("graph_with_kernel").unwrap();
        let json = serde_json::to_string_pretty(&manifest).unwrap();
        let back: ScenarioManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(manifest, back);
    }

    #[test]
    fn explicit_point_outside_box_is_rejected() {
        let mut manifest = gallery::builtin_scenario("paper_example").unwrap();
        manifest.sampling = SamplingSpec::Explicit {
            points: vec![vec![100.0, 0.0, 0.0, 0.0]],
        };
        let errors = manifest.validate();
        assert!(
            errors.iter().any(|e| e.contains("outside the source domain box")),
            "{errors:?}"
        );
    }
}
