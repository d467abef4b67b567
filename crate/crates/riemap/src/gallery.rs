//! Built-in scenario gallery: each entry is a concrete map between charts
//! with a declared expected outcome per check, so the gallery doubles as
//! executable documentation. Negative controls declare their expected
//! failures explicitly.

use crate::checks::{CheckId, CheckStatus};
use crate::error::{Error, Result};
use crate::manifest::{ManifoldSpec, SamplingSpec, ScenarioManifest};
use crate::expr::DerivMode;
use std::collections::BTreeMap;

/// A gallery entry: name, description, expected per-check outcome and a note
/// on where the construction comes from.
#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub literature_note: &'static str,
    pub expected: BTreeMap<CheckId, CheckStatus>,
}

const DEFAULT_POINTS: usize = 100;
const DEFAULT_SEED: u64 = 42;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn flat_metric(n: usize) -> Vec<Vec<String>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { "1".into() } else { "0".into() })
                .collect()
        })
        .collect()
}

fn diag_metric(entries: &[&str]) -> Vec<Vec<String>> {
    let n = entries.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { entries[i].into() } else { "0".into() })
                .collect()
        })
        .collect()
}

/// Standard compatible complex structure `J(a¹,a²,…) = (−a², a¹, …)` as a
/// block-diagonal (1,1)-tensor grid.
fn standard_j(n: usize) -> Vec<Vec<String>> {
    assert!(n % 2 == 0);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i % 2 == 0 && j == i + 1 {
                        "-1".into()
                    } else if i % 2 == 1 && j == i - 1 {
                        "1".into()
                    } else {
                        "0".into()
                    }
                })
                .collect()
        })
        .collect()
}

fn boxes(n: usize, half_width: f64) -> Vec<[f64; 2]> {
    vec![[-half_width, half_width]; n]
}

fn expectations(overrides: &[(CheckId, CheckStatus)]) -> BTreeMap<CheckId, CheckStatus> {
    let mut map: BTreeMap<CheckId, CheckStatus> = CheckId::ALL
        .iter()
        .map(|&c| (c, CheckStatus::Pass))
        .collect();
    for (c, s) in overrides {
        map.insert(*c, *s);
    }
    map
}

fn expected_strings(expected: &BTreeMap<CheckId, CheckStatus>) -> BTreeMap<String, String> {
    expected
        .iter()
        .map(|(c, s)| (c.name().to_string(), s.name().to_string()))
        .collect()
}

/// The gallery registry in display order.
pub fn entries() -> Vec<GalleryEntry> {
    use CheckId::*;
    use CheckStatus::*;
    let skip_holomorphy_family = [
        (Invariance, Skipped),
        (KahlerSffCommutation, Skipped),
        (HolomorphicCurvature, Skipped),
        (HarmonicityEquivalence, Skipped),
        (SpaceFormCriterion, Skipped),
    ];
    vec![
        GalleryEntry {
            name: "paper_example",
            description: "R⁴ → R⁴, (x1,x2,x3,x4) ↦ ((x1+x3)/√2, (x2+x4)/√2, 0, 0); flat \
                          metrics, standard J: a holomorphic Riemannian map with both a \
                          kernel and a normal part",
            literature_note: "interpolates between a holomorphic submersion and a Kähler \
                              submanifold; every identity holds with zero residual",
            expected: expectations(&[]),
        },
        GalleryEntry {
            name: "kahler_graph",
            description: "z ↦ (z, z²) as R² → R⁴ with the induced (pullback) source \
                          metric (1+4(x²+y²))·I: a Kähler submanifold instance, ker F_* = {0}",
            literature_note: "complex submanifolds of Kähler manifolds are minimal, so the \
                              graph is harmonic although it is curved",
            expected: expectations(&[]),
        },
        GalleryEntry {
            name: "graph_with_kernel",
            description: "(x,y,u,v) ↦ (x, y, x²−y², 2xy) with source metric \
                          diag(1+4(x²+y²), 1+4(x²+y²), 1, 1): holomorphic Riemannian map \
                          with nontrivial kernel, curvature and normal bundle",
            literature_note: "the main worked example: source sectional curvature −8 at \
                              the origin closes the curvature-transfer identity against \
                              ‖(∇F_*)(X,X)‖² = 4",
            expected: expectations(&[]),
        },
        GalleryEntry {
            name: "flat_submersion",
            description: "R⁴ → R², (x1..x4) ↦ ((x1+x3)/√2, (x2+x4)/√2): a holomorphic \
                          submersion, (range F_*)^⊥ = {0}",
            literature_note: "holomorphic submersions between almost Hermitian manifolds \
                              are the normal-space-trivial case of holomorphic Riemannian maps",
            expected: expectations(&[]),
        },
        GalleryEntry {
            name: "parabola_graph",
            description: "(x,u) ↦ (x, x², 0) into R³ with pullback source metric \
                          diag(1+4x², 1): an isometric immersion with a kernel direction \
                          that is not minimal (‖H‖ = 2 at x = 0)",
            literature_note: "the plane curve y = x² has curvature 2 at its vertex; with \
                              no complex structure declared every J-dependent check skips",
            expected: expectations(&[
                (HolomorphyDefect, Skipped),
                (AlmostHermitian, Skipped),
                (KahlerSource, Skipped),
                (KahlerTarget, Skipped),
                (Invariance, Skipped),
                (KahlerSffCommutation, Skipped),
                (HolomorphicCurvature, Skipped),
                (HarmonicityEquivalence, Skipped),
                (SpaceFormCriterion, Skipped),
            ]),
        },
        GalleryEntry {
            name: "anti_holomorphic",
            description: "conjugation (x,y) ↦ (x,−y) on flat C: an isometry that \
                          anti-commutes with J, so exactly the holomorphy defect fails (= 2)",
            literature_note: "negative control: J₂F_* = −F_*J₁ forces ‖J₂A − AJ₁‖ = 2 for \
                              an orthogonal Jacobian",
            expected: {
                let mut map = expectations(&skip_holomorphy_family);
                map.insert(HolomorphyDefect, Fail);
                map
            },
        },
        GalleryEntry {
            name: "non_riemannian",
            description: "z ↦ z² on flat C sampled away from the unit circle: holomorphic \
                          but not Riemannian (F_* scales by |2z|)",
            literature_note: "negative control: the horizontal Gram defect is |4|z|² − 1| \
                              ≥ 3 on the sampling box, so exactly the Riemannian defect fails",
            expected: expectations(&[
                (RiemannianDefect, Fail),
                (GaussOrthogonality, Skipped),
                (GaussEquation, Skipped),
                (KahlerSffCommutation, Skipped),
                (HolomorphicCurvature, Skipped),
                (HarmonicityEquivalence, Skipped),
                (SpaceFormCriterion, Skipped),
                (ShapeOperatorDuality, Skipped),
            ]),
        },
        GalleryEntry {
            name: "non_kahler_source",
            description: "identity on the chart with metric diag(1+u², 1+u², 1, 1) and \
                          standard J: almost Hermitian but not Kähler (defect 1 at u = 1)",
            literature_note: "negative control: dω = d(λ)∧dx∧dy ≠ 0 once the conformal \
                              factor depends on u, so the Kähler checks fail while the \
                              Kähler-hypothesis identities skip",
            expected: expectations(&[
                (KahlerSource, Fail),
                (KahlerTarget, Fail),
                (KahlerSffCommutation, Skipped),
                (HolomorphicCurvature, Skipped),
                (HarmonicityEquivalence, Skipped),
                (SpaceFormCriterion, Skipped),
            ]),
        },
    ]
}

pub fn entry(name: &str) -> Result<GalleryEntry> {
    entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownScenario {
            name: name.to_string(),
            valid: entries()
                .iter()
                .map(|e| e.name)
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// Builds the manifest for a gallery entry.
pub fn builtin_scenario(name: &str) -> Result<ScenarioManifest> {
    let entry = entry(name)?;
    let sampling = SamplingSpec::Random {
        count: DEFAULT_POINTS,
        seed: DEFAULT_SEED,
        bounds: None,
    };
    let lambda = "1 + 4*(x^2 + y^2)";
    let manifest = match name {
        "paper_example" => ScenarioManifest {
            name: name.into(),
            description: entry.description.into(),
            source: ManifoldSpec {
                coords: names(&["x1", "x2", "x3", "x4"]),
                metric: flat_metric(4),
                complex_structure: Some(standard_j(4)),
                domain_box: boxes(4, 2.0),
            },
            target: ManifoldSpec {
                coords: names(&["y1", "y2", "y3", "y4"]),
                metric: flat_metric(4),
                complex_structure: Some(standard_j(4)),
                domain_box: boxes(4, 4.0),
            },
            map: names(&[
                "(x1 + x3)/sqrt(2)",
                "(x2 + x4)/sqrt(2)",
                "0",
                "0",
            ]),
            normal_fields: vec![names(&["0", "0", "1", "0"]), names(&["0", "0", "0", "1"])],
            sampling,
            checks: None,
            tolerances: None,
            mode: DerivMode::Jets,
            expected: expected_strings(&entry.expected),
        },
        "kahler_graph" => ScenarioManifest {
            name: name.into(),
            description: entry.description.into(),
            source: ManifoldSpec {
                coords: names(&["x", "y"]),
                metric: diag_metric(&[lambda, lambda]),
                complex_structure: Some(standard_j(2)),
                domain_box: boxes(2, 1.0),
            },
            target: ManifoldSpec {
                coords: names(&["z1", "z2", "z3", "z4"]),
                metric: flat_metric(4),
                complex_structure: Some(standard_j(4)),
                domain_box: boxes(4, 4.0),
            },
            map: names(&["x", "y", "x^2 - y^2", "2*x*y"]),
            normal_fields: vec![
                names(&["-2*z1", "2*z2", "1", "0"]),
                names(&["-2*z2", "-2*z1", "0", "1"]),
            ],
            sampling,
            checks: None,
            tolerances: None,
            mode: DerivMode::Jets,
            expected: expected_strings(&entry.expected),
        },
        "graph_with_kernel" => ScenarioManifest {
            name: name.into(),
            description: entry.description.into(),
            source: ManifoldSpec {
                coords: names(&["x", "y", "u", "v"]),
                metric: diag_metric(&[lambda, lambda, "1", "1"]),
                complex_structure: Some(standard_j(4)),
                domain_box: boxes(4, 1.0),
            },
            target: ManifoldSpec {
                coords: names(&["z1", "z2", "z3", "z4"]),
                metric: flat_metric(4),
                complex_structure: Some(standard_j(4)),
                domain_box: boxes(4, 4.0),
            },
            map: names(&["x", "y", "x^2 - y^2", "2*x*y"]),
            normal_fields: vec![
                names(&["-2*z1", "2*z2", "1", "0"]),
                names(&["-2*z2", "-2*z1", "0", "1"]),
            ],
            sampling,
            checks: None,
            tolerances: None,
            mode: DerivMode::Jets,
            expected: expected_strings(&entry.expected),
        },
        "flat_submersion" => ScenarioManifest {
            name: name.into(),
            description: entry.description.into(),
            source: ManifoldSpec {
                coords: names(&["x1", "x2", "x3", "x4"]),
                metric: flat_metric(4),
                complex_structure: Some(standard_j(4)),
                domain_box: boxes(4, 2.0),
            },
            target: ManifoldSpec {
                coords: names(&["w1", "w2"]),
                metric: flat_metric(2),
                complex_structure: Some(standard_j(2)),
                domain_box: boxes(2, 4.0),
            },
            map: names(&["(x1 + x3)/sqrt(2)", "(x2 + x4)/sqrt(2)"]),
            normal_fields: vec![],
            sampling,
            checks: None,
            tolerances: None,
            mode: DerivMode::Jets,
            expected: expected_strings(&entry.expected),
        },
        "parabola_graph" => ScenarioManifest {
            name: name.into(),
            description: entry.description.into(),
            source: ManifoldSpec {
                coords: names(&["x", "u"]),
                metric: diag_metric(&["1 + 4*x^2", "1"]),
                complex_structure: None,
                domain_box: boxes(2, 1.0),
            },
            target: ManifoldSpec {
                coords: names(&["z1", "z2", "z3"]),
                metric: flat_metric(3),
                complex_structure: None,
                domain_box: boxes(3, 2.0),
            },
            map: names(&["x", "x^2", "0"]),
            normal_fields: vec![names(&["-2*z1", "1", "0"]), names(&["0", "0", "1"])],
            sampling,
            checks: None,
            tolerances: None,
            mode: DerivMode::Jets,
            expected: expected_strings(&entry.expected),
        },
        "anti_holomorphic" => ScenarioManifest {
            name: name.into(),
            description: entry.description.into(),
            source: ManifoldSpec {
                coords: names(&["x", "y"]),
                metric: flat_metric(2),
                complex_structure: Some(standard_j(2)),
                domain_box: boxes(2, 2.0),
            },
            target: ManifoldSpec {
                coords: names(&["w1", "w2"]),
                metric: flat_metric(2),
                complex_structure: Some(standard_j(2)),
                domain_box: boxes(2, 3.0),
            },
            map: names(&["x", "-y"]),
            normal_fields: vec![],
            sampling,
            checks: None,
            tolerances: None,
            mode: DerivMode::Jets,
            expected: expected_strings(&entry.expected),
        },
        "non_riemannian" => ScenarioManifest {
            name: name.into(),
            description: entry.description.into(),
            source: ManifoldSpec {
                coords: names(&["x", "y"]),
                metric: flat_metric(2),
                complex_structure: Some(standard_j(2)),
                domain_box: vec![[1.0, 2.0], [1.0, 2.0]],
            },
            target: ManifoldSpec {
                coords: names(&["w1", "w2"]),
                metric: flat_metric(2),
                complex_structure: Some(standard_j(2)),
                domain_box: vec![[-10.0, 10.0], [-10.0, 10.0]],
            },
            map: names(&["x^2 - y^2", "2*x*y"]),
            normal_fields: vec![],
            sampling,
            checks: None,
            tolerances: None,
            mode: DerivMode::Jets,
            expected: expected_strings(&entry.expected),
        },
        "non_kahler_source" => {
            let metric = diag_metric(&["1 + u^2", "1 + u^2", "1", "1"]);
            let target_metric = diag_metric(&["1 + c^2", "1 + c^2", "1", "1"]);
            ScenarioManifest {
                name: name.into(),
                description: entry.description.into(),
                source: ManifoldSpec {
                    coords: names(&["x", "y", "u", "v"]),
                    metric,
                    complex_structure: Some(standard_j(4)),
                    domain_box: boxes(4, 1.5),
                },
                target: ManifoldSpec {
                    coords: names(&["a", "b", "c", "d"]),
                    metric: target_metric,
                    complex_structure: Some(standard_j(4)),
                    domain_box: boxes(4, 1.5),
                },
                map: names(&["x", "y", "u", "v"]),
                normal_fields: vec![],
                sampling,
                checks: None,
                tolerances: None,
                mode: DerivMode::Jets,
                expected: expected_strings(&entry.expected),
            }
        }
        _ => unreachable!("entry() already validated the name"),
    };
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenario_lists_names() {
        let err = builtin_scenario("nope").unwrap_err();
        match err {
            Error::UnknownScenario { valid, .. } => {
                assert!(valid.contains("paper_example"));
                assert!(valid.contains("non_riemannian"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn gallery_has_required_entries() {
        let names: Vec<&str> = entries().iter().map(|e| e.name).collect();
        for required in [
            "paper_example",
            "kahler_graph",
            "graph_with_kernel",
            "flat_submersion",
            "anti_holomorphic",
            "non_riemannian",
            "non_kahler_source",
        ] {
            assert!(names.contains(&required), "missing {required}");
        }
    }
}
