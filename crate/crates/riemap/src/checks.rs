//! Identity verifier: every lemma and theorem about Riemannian and
//! holomorphic Riemannian maps is realized as a named residual check over
//! sampled points. Checks are hypothesis-gated: when a lemma's hypotheses do
//! not hold at the sampled points the check reports SKIPPED (naming the
//! violated hypothesis) instead of failing.

use crate::error::{Error, Result};
use crate::expr::{DerivMode, ExprAst};
use crate::geometry::contract_riemann;
use crate::linalg::{max_abs, metric_dot, metric_norm, project_onto_frame};
use crate::map::{SmoothMap, TangentSplit};
use crate::sample::{sample_points, shrink_box, SplitMix64};
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;

/// Residual checks by name. `ALL` is the registry order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckId {
    RiemannianDefect,
    HolomorphyDefect,
    AlmostHermitian,
    KahlerSource,
    KahlerTarget,
    GaussOrthogonality,
    GaussEquation,
    Invariance,
    KahlerSffCommutation,
    HolomorphicCurvature,
    HarmonicityEquivalence,
    SpaceFormCriterion,
    ShapeOperatorDuality,
    KernelInvolutivity,
}

impl CheckId {
    pub const ALL: [CheckId; 14] = [
        CheckId::RiemannianDefect,
        CheckId::HolomorphyDefect,
        CheckId::AlmostHermitian,
        CheckId::KahlerSource,
        CheckId::KahlerTarget,
        CheckId::GaussOrthogonality,
        CheckId::GaussEquation,
        CheckId::Invariance,
        CheckId::KahlerSffCommutation,
        CheckId::HolomorphicCurvature,
        CheckId::HarmonicityEquivalence,
        CheckId::SpaceFormCriterion,
        CheckId::ShapeOperatorDuality,
        CheckId::KernelInvolutivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::RiemannianDefect => "riemannian_defect",
            CheckId::HolomorphyDefect => "holomorphy_defect",
            CheckId::AlmostHermitian => "almost_hermitian",
            CheckId::KahlerSource => "kahler_source",
            CheckId::KahlerTarget => "kahler_target",
            CheckId::GaussOrthogonality => "gauss_orthogonality",
            CheckId::GaussEquation => "gauss_equation",
            CheckId::Invariance => "invariance",
            CheckId::KahlerSffCommutation => "kahler_sff_commutation",
            CheckId::HolomorphicCurvature => "holomorphic_curvature",
            CheckId::HarmonicityEquivalence => "harmonicity_equivalence",
            CheckId::SpaceFormCriterion => "space_form_criterion",
            CheckId::ShapeOperatorDuality => "shape_operator_duality",
            CheckId::KernelInvolutivity => "kernel_involutivity",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownCheck {
                name: name.to_string(),
                valid: Self::ALL
                    .iter()
                    .map(|c| c.name())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn name(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "pass" => Some(CheckStatus::Pass),
            "fail" => Some(CheckStatus::Fail),
            "skipped" => Some(CheckStatus::Skipped),
            _ => None,
        }
    }
}

/// One residual measurement at one point. `passed ⇔ residual ≤ tolerance`,
/// where `tolerance` is the effective value `max(abs_tol, rel_tol·scale)`.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub check_id: &'static str,
    pub point: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: String,
}

/// Per-check aggregate over all sampled points. Only failing results are
/// retained individually.
#[derive(Debug, Clone)]
pub struct CheckAggregate {
    pub check: CheckId,
    pub status: CheckStatus,
    pub reason: Option<String>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub max_scale: f64,
    pub pass_count: usize,
    pub total: usize,
    pub failures: Vec<CheckResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overall {
    Pass,
    PassWithSkips,
    Fail,
}

impl Overall {
    pub fn name(self) -> &'static str {
        match self {
            Overall::Pass => "pass",
            Overall::PassWithSkips => "pass_with_skips",
            Overall::Fail => "fail",
        }
    }
}

/// Structured outcome of a suite run.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub scenario: String,
    pub mode: DerivMode,
    pub seed: u64,
    pub point_count: usize,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckAggregate>,
    pub warnings: Vec<String>,
    pub overall: Overall,
}

/// Residual, rank and relative tolerances of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    pub rank: f64,
    pub relative: f64,
}

impl Tolerances {
    pub fn defaults(mode: DerivMode) -> Self {
        Self {
            residual: match mode {
                DerivMode::Jets => 1e-8,
                DerivMode::FiniteDiff => 1e-5,
            },
            rank: 1e-8,
            relative: 1e-7,
        }
    }

    fn effective(&self, scale: f64) -> f64 {
        self.residual.max(self.relative * scale)
    }
}

/// How points are drawn for a run.
#[derive(Debug, Clone)]
pub enum Sampling {
    Explicit(Vec<Vec<f64>>),
    Random {
        count: usize,
        seed: u64,
        bounds: Option<Vec<(f64, f64)>>,
    },
}

impl Sampling {
    pub fn seed(&self) -> u64 {
        match self {
            Sampling::Explicit(_) => 0,
            Sampling::Random { seed, .. } => *seed,
        }
    }
}

/// A fully resolved scenario: the map under test, optional normal fields for
/// the shape-operator check, sampling, tolerances and (for negative controls)
/// the expected status per check.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub map: SmoothMap,
    pub normal_fields: Vec<Vec<ExprAst>>,
    pub sampling: Sampling,
    pub checks: Vec<CheckId>,
    pub tolerances: Tolerances,
    pub mode: DerivMode,
    pub expected: BTreeMap<CheckId, CheckStatus>,
    /// Diagnostic switch: `false` runs lemma checks without hypothesis gating.
    pub gate_hypotheses: bool,
}

const DIRECTIONS_PER_POINT: usize = 3;
const RANDOM_QUADRUPLES: usize = 200;

impl Scenario {
    /// Sampled points followed by the rank-constancy structural check.
    /// Returns one tangent split per point plus any domain warnings.
    pub fn prepare_points(&self) -> Result<(Vec<TangentSplit>, Vec<String>)> {
        let points = match &self.sampling {
            Sampling::Explicit(points) => points.clone(),
            Sampling::Random {
                count,
                seed,
                bounds,
            } => {
                let bounds = bounds
                    .clone()
                    .unwrap_or_else(|| shrink_box(self.map.source().domain_box()));
                sample_points(&bounds, *count, *seed)
            }
        };
        let mut splits = Vec::with_capacity(points.len());
        let mut warnings = Vec::new();
        for p in &points {
            let split = self
                .map
                .tangent_split_at(p, self.tolerances.rank, self.mode)?;
            if !self.map.target().contains(&split.target_point) {
                warnings.push(format!(
                    "F({:?}) = {:?} lies outside the target domain box",
                    p, split.target_point
                ));
            }
            splits.push(split);
        }
        if let Some(first) = splits.first() {
            for s in &splits {
                if s.rank != first.rank {
                    return Err(Error::RankChanged {
                        point: s.point.clone(),
                        expected: first.rank,
                        got: s.rank,
                    });
                }
            }
        }
        Ok((splits, warnings))
    }

    /// Runs the configured checks and assembles the report.
    pub fn run_suite(&self) -> Result<CheckReport> {
        let (splits, warnings) = self.prepare_points()?;
        let mut aggregates = Vec::with_capacity(self.checks.len());
        for &check in &self.checks {
            aggregates.push(run_check(self, check, &splits)?);
        }
        let overall = if aggregates.iter().any(|a| a.status == CheckStatus::Fail) {
            Overall::Fail
        } else if aggregates.iter().any(|a| a.status == CheckStatus::Skipped) {
            Overall::PassWithSkips
        } else {
            Overall::Pass
        };
        Ok(CheckReport {
            scenario: self.name.clone(),
            mode: self.mode,
            seed: self.sampling.seed(),
            point_count: splits.len(),
            tolerances: self.tolerances,
            checks: aggregates,
            warnings,
            overall,
        })
    }

    fn direction_rng(&self, check: CheckId) -> SplitMix64 {
        // independent deterministic stream per check
        SplitMix64::new(self.sampling.seed() ^ (0xC0FF_EE00 + check as u64))
    }
}

/// Compares a report against expected statuses. Checks without an explicit
/// expectation must simply not fail. Returns mismatch descriptions.
pub fn outcome_mismatches(
    report: &CheckReport,
    expected: &BTreeMap<CheckId, CheckStatus>,
) -> Vec<String> {
    let mut mismatches = Vec::new();
    for agg in &report.checks {
        match expected.get(&agg.check) {
            Some(want) if agg.status != *want => mismatches.push(format!(
                "{}: expected {}, got {}",
                agg.check.name(),
                want.name(),
                agg.status.name()
            )),
            None if agg.status == CheckStatus::Fail => mismatches.push(format!(
                "{}: unexpected failure (max residual {:e})",
                agg.check.name(),
                agg.max_residual
            )),
            _ => {}
        }
    }
    mismatches
}

/// Runs a single named check over prepared splits.
pub fn run_check(
    scenario: &Scenario,
    check: CheckId,
    splits: &[TangentSplit],
) -> Result<CheckAggregate> {
    match check {
        CheckId::RiemannianDefect => check_riemannian_defect(scenario, splits),
        CheckId::HolomorphyDefect => check_holomorphy_defect(scenario, splits),
        CheckId::AlmostHermitian => check_almost_hermitian(scenario, splits),
        CheckId::KahlerSource => check_kahler(scenario, splits, true),
        CheckId::KahlerTarget => check_kahler(scenario, splits, false),
        CheckId::GaussOrthogonality => check_gauss_orthogonality(scenario, splits),
        CheckId::GaussEquation => check_gauss_equation(scenario, splits),
        CheckId::Invariance => check_invariance(scenario, splits),
        CheckId::KahlerSffCommutation => check_kahler_sff_commutation(scenario, splits),
        CheckId::HolomorphicCurvature => check_holomorphic_curvature(scenario, splits),
        CheckId::HarmonicityEquivalence => check_harmonicity_equivalence(scenario, splits),
        CheckId::SpaceFormCriterion => check_space_form_criterion(scenario, splits),
        CheckId::ShapeOperatorDuality => check_shape_operator_duality(scenario, splits),
        CheckId::KernelInvolutivity => check_kernel_involutivity(scenario, splits),
    }
}

fn aggregate(check: CheckId, results: Vec<(CheckResult, f64)>) -> CheckAggregate {
    let total = results.len();
    let pass_count = results.iter().filter(|(r, _)| r.passed).count();
    let max_residual = results
        .iter()
        .map(|(r, _)| r.residual)
        .fold(0.0f64, f64::max);
    let mean_residual = if total == 0 {
        0.0
    } else {
        results.iter().map(|(r, _)| r.residual).sum::<f64>() / total as f64
    };
    let max_scale = results.iter().map(|(_, s)| *s).fold(0.0f64, f64::max);
    let status = if pass_count == total {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    CheckAggregate {
        check,
        status,
        reason: None,
        max_residual,
        mean_residual,
        max_scale,
        pass_count,
        total,
        failures: results
            .into_iter()
            .filter(|(r, _)| !r.passed)
            .map(|(r, _)| r)
            .collect(),
    }
}

fn skipped(check: CheckId, reason: String) -> CheckAggregate {
    CheckAggregate {
        check,
        status: CheckStatus::Skipped,
        reason: Some(reason),
        max_residual: 0.0,
        mean_residual: 0.0,
        max_scale: 0.0,
        pass_count: 0,
        total: 0,
        failures: Vec::new(),
    }
}

fn make_result(
    check: CheckId,
    tol: &Tolerances,
    point: &[f64],
    residual: f64,
    scale: f64,
    details: String,
) -> (CheckResult, f64) {
    let tolerance = tol.effective(scale);
    (
        CheckResult {
            check_id: check.name(),
            point: point.to_vec(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            details,
        },
        scale,
    )
}

// ----------------------------------------------------------------------------
// Hypotheses
// ----------------------------------------------------------------------------

/// `Ok(Some(reason))` means the hypothesis is violated and the check skips.
type Hypothesis = Result<Option<String>>;

fn hyp_riemannian(scenario: &Scenario, splits: &[TangentSplit]) -> Hypothesis {
    if !scenario.gate_hypotheses {
        return Ok(None);
    }
    for split in splits {
        let defect = scenario
            .map
            .riemannian_defect_with_split(split, scenario.mode)?;
        if defect > scenario.tolerances.residual {
            return Ok(Some(format!(
                "Riemannian-map hypothesis fails: defect {defect:.3e} at {:?}",
                split.point
            )));
        }
    }
    Ok(None)
}

fn hyp_holomorphic(scenario: &Scenario, splits: &[TangentSplit]) -> Hypothesis {
    if !scenario.map.source().has_complex_structure()
        || !scenario.map.target().has_complex_structure()
    {
        return Ok(Some(
            "holomorphy hypothesis fails: complex structure absent".to_string(),
        ));
    }
    if !scenario.gate_hypotheses {
        return Ok(None);
    }
    for split in splits {
        let defect = scenario
            .map
            .holomorphy_defect_at(&split.point, scenario.mode)?;
        if defect > scenario.tolerances.residual {
            return Ok(Some(format!(
                "holomorphy hypothesis fails: defect {defect:.3e} at {:?}",
                split.point
            )));
        }
    }
    Ok(None)
}

fn hyp_kahler(scenario: &Scenario, splits: &[TangentSplit], source_side: bool) -> Hypothesis {
    let (chart, which) = if source_side {
        (scenario.map.source(), "source")
    } else {
        (scenario.map.target(), "target")
    };
    if !chart.has_complex_structure() {
        return Ok(Some(format!(
            "Kähler hypothesis fails: {which} has no complex structure"
        )));
    }
    if !scenario.gate_hypotheses {
        return Ok(None);
    }
    for split in splits {
        let p = if source_side {
            &split.point
        } else {
            &split.target_point
        };
        let defect = chart.kahler_defect(p, scenario.mode)?;
        if defect > scenario.tolerances.residual {
            return Ok(Some(format!(
                "Kähler hypothesis fails on {which}: defect {defect:.3e} at {p:?}"
            )));
        }
    }
    Ok(None)
}

fn hyp_source_almost_hermitian(scenario: &Scenario, splits: &[TangentSplit]) -> Hypothesis {
    let chart = scenario.map.source();
    if !chart.has_complex_structure() {
        return Ok(Some(
            "almost Hermitian hypothesis fails: source has no complex structure".to_string(),
        ));
    }
    if !scenario.gate_hypotheses {
        return Ok(None);
    }
    for split in splits {
        let (dj, dc) = chart.validate_almost_hermitian(&split.point)?;
        let defect = dj.max(dc);
        if defect > scenario.tolerances.residual {
            return Ok(Some(format!(
                "almost Hermitian hypothesis fails on source: defect {defect:.3e} at {:?}",
                split.point
            )));
        }
    }
    Ok(None)
}

fn hyp_target_flat(scenario: &Scenario, splits: &[TangentSplit]) -> Hypothesis {
    if !scenario.gate_hypotheses {
        return Ok(None);
    }
    for split in splits {
        let curv = scenario
            .map
            .target()
            .curvature_at(&split.target_point, scenario.mode)?;
        let worst = curv.riem_down.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if worst > scenario.tolerances.residual {
            return Ok(Some(format!(
                "flat-target hypothesis fails: |R²| = {worst:.3e} at {:?}",
                split.target_point
            )));
        }
    }
    Ok(None)
}

fn hyp_horizontal_involutive(scenario: &Scenario, splits: &[TangentSplit]) -> Hypothesis {
    if !scenario.gate_hypotheses {
        return Ok(None);
    }
    let tol = scenario.tolerances.residual.max(1e-6);
    for split in splits {
        let defect = scenario.map.horizontal_involutivity_defect_at(
            &split.point,
            scenario.tolerances.rank,
            scenario.mode,
        )?;
        if defect > tol {
            return Ok(Some(format!(
                "horizontal-involutivity hypothesis fails: defect {defect:.3e} at {:?}",
                split.point
            )));
        }
    }
    Ok(None)
}

macro_rules! gate {
    ($check:expr, $hyp:expr) => {
        if let Some(reason) = $hyp? {
            return Ok(skipped($check, reason));
        }
    };
}

// ----------------------------------------------------------------------------
// Structural checks
// ----------------------------------------------------------------------------

fn check_riemannian_defect(scenario: &Scenario, splits: &[TangentSplit]) -> Result<CheckAggregate> {
    let check = CheckId::RiemannianDefect;
    let map = &scenario.map;
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let diff = map.differential_at(&split.point, scenario.mode)?;
        let g1 = map.source().metric_at(&split.point)?;
        let g2 = map.target().metric_at(&split.target_point)?;
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for ea in &split.hor_frame {
            let fa = &diff.jacobian * ea;
            for eb in &split.hor_frame {
                let fb = &diff.jacobian * eb;
                let pushed = metric_dot(&g2, &fa, &fb);
                let base = metric_dot(&g1, ea, eb);
                residual = residual.max((pushed - base).abs());
                scale = scale.max(pushed.abs()).max(base.abs());
            }
        }
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            scale,
            format!("rank={}", split.rank),
        ));
    }
    Ok(aggregate(check, results))
}

fn check_holomorphy_defect(scenario: &Scenario, splits: &[TangentSplit]) -> Result<CheckAggregate> {
    let check = CheckId::HolomorphyDefect;
    let map = &scenario.map;
    if !map.source().has_complex_structure() || !map.target().has_complex_structure() {
        return Ok(skipped(
            check,
            "complex structure absent on source or target".to_string(),
        ));
    }
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let diff = map.differential_at(&split.point, scenario.mode)?;
        let j1 = map.source().complex_structure_at(&split.point)?;
        let j2 = map.target().complex_structure_at(&split.target_point)?;
        let left = &j2 * &diff.jacobian;
        let right = &diff.jacobian * &j1;
        let residual = max_abs(&(&left - &right));
        let scale = max_abs(&left).max(max_abs(&right));
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            scale,
            String::new(),
        ));
    }
    Ok(aggregate(check, results))
}

fn check_almost_hermitian(scenario: &Scenario, splits: &[TangentSplit]) -> Result<CheckAggregate> {
    let check = CheckId::AlmostHermitian;
    let map = &scenario.map;
    let source_j = map.source().has_complex_structure();
    let target_j = map.target().has_complex_structure();
    if !source_j && !target_j {
        return Ok(skipped(check, "no complex structure declared".to_string()));
    }
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let mut residual = 0.0f64;
        let mut details = Vec::new();
        if source_j {
            let (dj, dc) = map.source().validate_almost_hermitian(&split.point)?;
            residual = residual.max(dj).max(dc);
            details.push(format!("source: J²+I={dj:.3e} compat={dc:.3e}"));
        }
        if target_j {
            let (dj, dc) = map.target().validate_almost_hermitian(&split.target_point)?;
            residual = residual.max(dj).max(dc);
            details.push(format!("target: J²+I={dj:.3e} compat={dc:.3e}"));
        }
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            1.0,
            details.join("; "),
        ));
    }
    Ok(aggregate(check, results))
}

fn check_kahler(
    scenario: &Scenario,
    splits: &[TangentSplit],
    source_side: bool,
) -> Result<CheckAggregate> {
    let check = if source_side {
        CheckId::KahlerSource
    } else {
        CheckId::KahlerTarget
    };
    let chart = if source_side {
        scenario.map.source()
    } else {
        scenario.map.target()
    };
    if !chart.has_complex_structure() {
        return Ok(skipped(check, "no complex structure declared".to_string()));
    }
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let p = if source_side {
            &split.point
        } else {
            &split.target_point
        };
        let (residual, scale) = chart.kahler_defect_terms(p, scenario.mode)?;
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            scale,
            String::new(),
        ));
    }
    Ok(aggregate(check, results))
}

// ----------------------------------------------------------------------------
// Lemma and theorem checks
// ----------------------------------------------------------------------------

/// `g2((∇F_*)(X,Y), F_*Z) = 0` for horizontal X, Y, Z.
fn check_gauss_orthogonality(
    scenario: &Scenario,
    splits: &[TangentSplit],
) -> Result<CheckAggregate> {
    let check = CheckId::GaussOrthogonality;
    gate!(check, hyp_riemannian(scenario, splits));
    let map = &scenario.map;
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let diff = map.differential_at(&split.point, scenario.mode)?;
        let g2 = map.target().metric_at(&split.target_point)?;
        let sff = map.sff_tensor_at(&split.point, scenario.mode)?;
        let pairs = frame_sff(&sff, &split.hor_frame);
        let pushed: Vec<DVector<f64>> =
            split.hor_frame.iter().map(|e| &diff.jacobian * e).collect();
        let mut residual = 0.0f64;
        let mut sff_norm = 0.0f64;
        let mut push_norm = 0.0f64;
        for row in &pairs {
            for v in row {
                sff_norm = sff_norm.max(metric_norm(&g2, v));
            }
        }
        for fz in &pushed {
            push_norm = push_norm.max(metric_norm(&g2, fz));
        }
        for row in &pairs {
            for v in row {
                for fz in &pushed {
                    residual = residual.max(metric_dot(&g2, v, fz).abs());
                }
            }
        }
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            sff_norm * push_norm,
            String::new(),
        ));
    }
    Ok(aggregate(check, results))
}

/// Gauss equation:
/// `g2(R²(F_*X,F_*Y)F_*Z,F_*T) = g1(R¹(X,Y)Z,T)
///  + g2((∇F_*)(X,Z),(∇F_*)(Y,T)) − g2((∇F_*)(Y,Z),(∇F_*)(X,T))`.
fn check_gauss_equation(scenario: &Scenario, splits: &[TangentSplit]) -> Result<CheckAggregate> {
    let check = CheckId::GaussEquation;
    gate!(check, hyp_riemannian(scenario, splits));
    let map = &scenario.map;
    let mut rng = scenario.direction_rng(check);
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let r = split.rank;
        if r == 0 {
            results.push(make_result(
                check,
                &scenario.tolerances,
                &split.point,
                0.0,
                0.0,
                "rank 0: no horizontal frame".to_string(),
            ));
            continue;
        }
        let diff = map.differential_at(&split.point, scenario.mode)?;
        let g2 = map.target().metric_at(&split.target_point)?;
        let r1 = map.source().curvature_at(&split.point, scenario.mode)?;
        let r2 = map
            .target()
            .curvature_at(&split.target_point, scenario.mode)?;
        let sff = map.sff_tensor_at(&split.point, scenario.mode)?;
        let pairs = frame_sff(&sff, &split.hor_frame);
        let pushed: Vec<DVector<f64>> =
            split.hor_frame.iter().map(|e| &diff.jacobian * e).collect();

        let quads: Vec<[usize; 4]> = if r <= 4 {
            let mut all = Vec::with_capacity(r * r * r * r);
            for a in 0..r {
                for b in 0..r {
                    for c in 0..r {
                        for d in 0..r {
                            all.push([a, b, c, d]);
                        }
                    }
                }
            }
            all
        } else {
            (0..RANDOM_QUADRUPLES)
                .map(|_| {
                    [
                        (rng.next_u64() % r as u64) as usize,
                        (rng.next_u64() % r as u64) as usize,
                        (rng.next_u64() % r as u64) as usize,
                        (rng.next_u64() % r as u64) as usize,
                    ]
                })
                .collect()
        };

        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for [a, b, c, d] in quads {
            let lhs = contract_riemann(&r2.riem_down, &pushed[a], &pushed[b], &pushed[c], &pushed[d]);
            let base = contract_riemann(
                &r1.riem_down,
                &split.hor_frame[a],
                &split.hor_frame[b],
                &split.hor_frame[c],
                &split.hor_frame[d],
            );
            let cross1 = metric_dot(&g2, &pairs[a][c], &pairs[b][d]);
            let cross2 = metric_dot(&g2, &pairs[b][c], &pairs[a][d]);
            residual = residual.max((lhs - base - cross1 + cross2).abs());
            scale = scale
                .max(lhs.abs())
                .max(base.abs())
                .max(cross1.abs())
                .max(cross2.abs());
        }
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            scale,
            String::new(),
        ));
    }
    Ok(aggregate(check, results))
}

/// Invariance of ker/horizontal under J1 and of range/normal under J2.
fn check_invariance(scenario: &Scenario, splits: &[TangentSplit]) -> Result<CheckAggregate> {
    let check = CheckId::Invariance;
    gate!(check, hyp_holomorphic(scenario, splits));
    let map = &scenario.map;
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let g1 = map.source().metric_at(&split.point)?;
        let g2 = map.target().metric_at(&split.target_point)?;
        let j1 = map.source().complex_structure_at(&split.point)?;
        let j2 = map.target().complex_structure_at(&split.target_point)?;
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for k in &split.ker_frame {
            let jk = &j1 * k;
            residual = residual.max(metric_norm(
                &g1,
                &project_onto_frame(&g1, &split.hor_frame, &jk),
            ));
            scale = scale.max(metric_norm(&g1, &jk));
        }
        for h in &split.hor_frame {
            let jh = &j1 * h;
            residual = residual.max(metric_norm(
                &g1,
                &project_onto_frame(&g1, &split.ker_frame, &jh),
            ));
            scale = scale.max(metric_norm(&g1, &jh));
        }
        for rf in &split.range_frame {
            let jr = &j2 * rf;
            residual = residual.max(metric_norm(
                &g2,
                &project_onto_frame(&g2, &split.normal_frame, &jr),
            ));
            scale = scale.max(metric_norm(&g2, &jr));
        }
        for nf in &split.normal_frame {
            let jn = &j2 * nf;
            residual = residual.max(metric_norm(
                &g2,
                &project_onto_frame(&g2, &split.range_frame, &jn),
            ));
            scale = scale.max(metric_norm(&g2, &jn));
        }
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            scale,
            String::new(),
        ));
    }
    Ok(aggregate(check, results))
}

/// `(∇F_*)(X, J1 Y) = (∇F_*)(Y, J1 X) = J2 (∇F_*)(X, Y)` into a Kähler target.
fn check_kahler_sff_commutation(
    scenario: &Scenario,
    splits: &[TangentSplit],
) -> Result<CheckAggregate> {
    let check = CheckId::KahlerSffCommutation;
    gate!(check, hyp_riemannian(scenario, splits));
    gate!(check, hyp_holomorphic(scenario, splits));
    gate!(check, hyp_kahler(scenario, splits, false));
    let map = &scenario.map;
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let g2 = map.target().metric_at(&split.target_point)?;
        let j1 = map.source().complex_structure_at(&split.point)?;
        let j2 = map.target().complex_structure_at(&split.target_point)?;
        let sff = map.sff_tensor_at(&split.point, scenario.mode)?;
        let rotated: Vec<DVector<f64>> = split.hor_frame.iter().map(|e| &j1 * e).collect();
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for (a, ea) in split.hor_frame.iter().enumerate() {
            for (b, eb) in split.hor_frame.iter().enumerate() {
                let left = contract_sff_vectors(&sff, ea, &rotated[b]);
                let swapped = contract_sff_vectors(&sff, eb, &rotated[a]);
                let right = &j2 * contract_sff_vectors(&sff, ea, eb);
                residual = residual
                    .max(metric_norm(&g2, &(&left - &right)))
                    .max(metric_norm(&g2, &(&left - &swapped)));
                scale = scale
                    .max(metric_norm(&g2, &left))
                    .max(metric_norm(&g2, &right))
                    .max(metric_norm(&g2, &swapped));
            }
        }
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            scale,
            String::new(),
        ));
    }
    Ok(aggregate(check, results))
}

/// Holomorphic-sectional-curvature transfer:
/// `g1(R¹(X,J1X)J1X,X) = g2(R²(F_*X,J2F_*X)J2F_*X,F_*X) − 2‖(∇F_*)(X,X)‖²`.
fn check_holomorphic_curvature(
    scenario: &Scenario,
    splits: &[TangentSplit],
) -> Result<CheckAggregate> {
    let check = CheckId::HolomorphicCurvature;
    gate!(check, hyp_riemannian(scenario, splits));
    gate!(check, hyp_holomorphic(scenario, splits));
    gate!(check, hyp_kahler(scenario, splits, false));
    gate!(check, hyp_source_almost_hermitian(scenario, splits));
    let map = &scenario.map;
    let mut rng = scenario.direction_rng(check);
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let g1 = map.source().metric_at(&split.point)?;
        let g2 = map.target().metric_at(&split.target_point)?;
        let j1 = map.source().complex_structure_at(&split.point)?;
        let j2 = map.target().complex_structure_at(&split.target_point)?;
        let r1 = map.source().curvature_at(&split.point, scenario.mode)?;
        let r2 = map
            .target()
            .curvature_at(&split.target_point, scenario.mode)?;
        let sff = map.sff_tensor_at(&split.point, scenario.mode)?;
        let diff = map.differential_at(&split.point, scenario.mode)?;
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for _ in 0..DIRECTIONS_PER_POINT {
            let Some(x) = random_horizontal(&mut rng, split, &g1) else {
                break;
            };
            let jx = &j1 * &x;
            let t1 = contract_riemann(&r1.riem_down, &x, &jx, &jx, &x);
            let fx = &diff.jacobian * &x;
            let jfx = &j2 * &fx;
            let t2 = contract_riemann(&r2.riem_down, &fx, &jfx, &jfx, &fx);
            let sxx = contract_sff_vectors(&sff, &x, &x);
            let t3 = 2.0 * metric_dot(&g2, &sxx, &sxx);
            residual = residual.max((t1 - t2 + t3).abs());
            scale = scale.max(t1.abs()).max(t2.abs()).max(t3.abs());
        }
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            scale,
            String::new(),
        ));
    }
    Ok(aggregate(check, results))
}

/// Harmonicity ⇔ minimality of `F_*((ker F_*)^⊥)`, plus `τ¹ = 0` and the
/// quantitative link `‖τ‖ = r‖H‖`.
fn check_harmonicity_equivalence(
    scenario: &Scenario,
    splits: &[TangentSplit],
) -> Result<CheckAggregate> {
    let check = CheckId::HarmonicityEquivalence;
    // the body itself needs no complex structure, so ungated diagnostic runs
    // bypass even the structural holomorphy requirement
    if scenario.gate_hypotheses {
        gate!(check, hyp_riemannian(scenario, splits));
        gate!(check, hyp_holomorphic(scenario, splits));
        gate!(check, hyp_kahler(scenario, splits, true));
    }
    let map = &scenario.map;
    let tol = scenario.tolerances.residual;
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let g2 = map.target().metric_at(&split.target_point)?;
        let (tau, tau1, tau2) = map.tension_with_split(split, scenario.mode)?;
        let r = split.rank.max(1) as f64;
        let h = &tau2 / r;
        let tau_norm = metric_norm(&g2, &tau);
        let tau1_norm = metric_norm(&g2, &tau1);
        let h_norm = metric_norm(&g2, &h);
        let harmonic = tau_norm <= tol;
        let minimal = h_norm <= tol;
        let link = (tau_norm - r * h_norm).abs();
        let equiv = if harmonic == minimal {
            0.0
        } else {
            tau_norm.max(r * h_norm)
        };
        let residual = tau1_norm.max(link).max(equiv);
        let scale = tau_norm.max(r * h_norm);
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            scale,
            format!(
                "|tau1|={tau1_norm:.3e} |tau|={tau_norm:.3e} |H|={h_norm:.3e} harmonic={harmonic} minimal={minimal}"
            ),
        ));
    }
    Ok(aggregate(check, results))
}

/// Forward direction of the space-form criterion against a flat Kähler
/// target: if `(∇F_*)(X,X)` vanishes on horizontal X then the source
/// holomorphic sectional curvature over horizontal directions is constant 0.
fn check_space_form_criterion(
    scenario: &Scenario,
    splits: &[TangentSplit],
) -> Result<CheckAggregate> {
    let check = CheckId::SpaceFormCriterion;
    gate!(check, hyp_riemannian(scenario, splits));
    gate!(check, hyp_holomorphic(scenario, splits));
    gate!(check, hyp_kahler(scenario, splits, false));
    gate!(check, hyp_target_flat(scenario, splits));
    gate!(check, hyp_horizontal_involutive(scenario, splits));
    let map = &scenario.map;
    let tol = scenario.tolerances.residual;
    let mut rng = scenario.direction_rng(check);
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let g1 = map.source().metric_at(&split.point)?;
        let g2 = map.target().metric_at(&split.target_point)?;
        let sff = map.sff_tensor_at(&split.point, scenario.mode)?;
        let mut sff_max = 0.0f64;
        let mut h_min = f64::INFINITY;
        let mut h_max = f64::NEG_INFINITY;
        let mut sampled = 0;
        for _ in 0..DIRECTIONS_PER_POINT {
            let Some(x) = random_horizontal(&mut rng, split, &g1) else {
                break;
            };
            let sxx = contract_sff_vectors(&sff, &x, &x);
            sff_max = sff_max.max(metric_norm(&g2, &sxx));
            let h = map
                .source()
                .holomorphic_sectional_curvature(&split.point, &x, scenario.mode)?;
            h_min = h_min.min(h);
            h_max = h_max.max(h);
            sampled += 1;
        }
        let (residual, details) = if sampled == 0 {
            (0.0, "rank 0: no horizontal directions".to_string())
        } else if sff_max <= tol {
            let spread = h_max - h_min;
            (
                spread.max(h_max.abs()).max(h_min.abs()),
                format!("|∇F_*(X,X)|≤{sff_max:.3e}; H ∈ [{h_min:.3e}, {h_max:.3e}]"),
            )
        } else {
            (
                0.0,
                format!(
                    "vacuous: |∇F_*(X,X)| up to {sff_max:.3e} > tol; H ∈ [{h_min:.3e}, {h_max:.3e}]"
                ),
            )
        };
        let scale = h_max.abs().max(h_min.abs()).max(sff_max);
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            if sampled == 0 { 0.0 } else { scale },
            details,
        ));
    }
    Ok(aggregate(check, results))
}

/// Duality `g2(S_V F_*X, F_*Y) = g2(V, (∇F_*)(X,Y))` and symmetry of `S_V`.
fn check_shape_operator_duality(
    scenario: &Scenario,
    splits: &[TangentSplit],
) -> Result<CheckAggregate> {
    let check = CheckId::ShapeOperatorDuality;
    gate!(check, hyp_riemannian(scenario, splits));
    let map = &scenario.map;
    let trivial_normal = splits
        .first()
        .map(|s| s.normal_frame.is_empty())
        .unwrap_or(true);
    if !trivial_normal && scenario.normal_fields.is_empty() {
        return Ok(skipped(
            check,
            "no normal fields declared for the shape-operator check".to_string(),
        ));
    }
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        if split.normal_frame.is_empty() {
            results.push(make_result(
                check,
                &scenario.tolerances,
                &split.point,
                0.0,
                0.0,
                "trivial normal bundle".to_string(),
            ));
            continue;
        }
        let g2 = map.target().metric_at(&split.target_point)?;
        let sff = map.sff_tensor_at(&split.point, scenario.mode)?;
        let pairs = frame_sff(&sff, &split.hor_frame);
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for v_field in &scenario.normal_fields {
            let data = match map.shape_operator_with_split(split, v_field, scenario.mode) {
                Ok(data) => data,
                Err(Error::NotNormal {
                    point, tangency, ..
                }) => {
                    return Ok(skipped(
                        check,
                        format!(
                            "normal field is tangent at {point:?} (tangential norm {tangency:.3e})"
                        ),
                    ))
                }
                Err(e) => return Err(e),
            };
            let mut v = DVector::zeros(map.target().dim());
            for (alpha, comp) in v_field.iter().enumerate() {
                v[alpha] = comp.eval_value(&split.target_point)?;
            }
            let r = split.rank;
            for a in 0..r {
                for b in 0..r {
                    let lhs = data.s_matrix[(b, a)];
                    let rhs = metric_dot(&g2, &v, &pairs[a][b]);
                    residual = residual.max((lhs - rhs).abs());
                    residual = residual.max((lhs - data.s_matrix[(a, b)]).abs());
                    scale = scale.max(lhs.abs()).max(rhs.abs());
                }
            }
        }
        results.push(make_result(
            check,
            &scenario.tolerances,
            &split.point,
            residual,
            scale,
            String::new(),
        ));
    }
    Ok(aggregate(check, results))
}

/// Numeric involutivity of the kernel distribution.
fn check_kernel_involutivity(
    scenario: &Scenario,
    splits: &[TangentSplit],
) -> Result<CheckAggregate> {
    let check = CheckId::KernelInvolutivity;
    let map = &scenario.map;
    // bracket accuracy is limited by the projector finite differences
    let tolerances = Tolerances {
        residual: scenario.tolerances.residual.max(1e-6),
        ..scenario.tolerances
    };
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let defect = map.kernel_involutivity_defect_at(
            &split.point,
            scenario.tolerances.rank,
            scenario.mode,
        )?;
        results.push(make_result(
            check,
            &tolerances,
            &split.point,
            defect,
            1.0,
            format!("kernel dim {}", split.ker_frame.len()),
        ));
    }
    Ok(aggregate(check, results))
}

// ----------------------------------------------------------------------------
// Shared helpers
// ----------------------------------------------------------------------------

/// `(∇F_*)(e_a, e_b)` for every pair of horizontal frame vectors.
fn frame_sff(sff: &[DMatrix<f64>], frame: &[DVector<f64>]) -> Vec<Vec<DVector<f64>>> {
    frame
        .iter()
        .map(|ea| {
            frame
                .iter()
                .map(|eb| contract_sff_vectors(sff, ea, eb))
                .collect()
        })
        .collect()
}

fn contract_sff_vectors(
    sff: &[DMatrix<f64>],
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> DVector<f64> {
    let mut out = DVector::zeros(sff.len());
    for (alpha, t) in sff.iter().enumerate() {
        out[alpha] = (t * y).dot(x);
    }
    out
}

/// Random g1-unit vector in the horizontal span; `None` when the rank is 0.
fn random_horizontal(
    rng: &mut SplitMix64,
    split: &TangentSplit,
    g1: &DMatrix<f64>,
) -> Option<DVector<f64>> {
    if split.rank == 0 {
        return None;
    }
    loop {
        let mut x = DVector::zeros(split.point.len());
        for e in &split.hor_frame {
            x += e * rng.symmetric();
        }
        let norm = metric_norm(g1, &x);
        if norm > 1e-6 {
            return Some(x / norm);
        }
    }
}
