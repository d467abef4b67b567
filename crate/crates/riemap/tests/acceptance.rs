//! Acceptance suite: each test exercises one release criterion at its stated
//! tolerance and prints a `[PASS]`/`[FAIL]` line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use nalgebra::DVector;
use riemap::checks::{outcome_mismatches, run_check};
use riemap::gallery::{builtin_scenario, entry};
use riemap::geometry::contract_riemann;
use riemap::linalg::metric_dot;
use riemap::report::write_json;
use riemap::sample::SplitMix64;
use riemap::{CheckId, CheckStatus, DerivMode, Scenario};

fn criterion(n: u32, summary: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("[PASS] criterion {n}: {summary}"),
        Err(why) => {
            println!("[FAIL] criterion {n}: {summary} — {why}");
            panic!("criterion {n} failed: {why}");
        }
    }
}

fn scenario_in_mode(name: &str, mode: DerivMode) -> Scenario {
    let mut manifest = builtin_scenario(name).expect("gallery entry");
    manifest.mode = mode;
    manifest.compile().expect("gallery manifest compiles")
}

fn scenario(name: &str) -> Scenario {
    scenario_in_mode(name, DerivMode::Jets)
}

fn basis(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn check<T: PartialOrd + std::fmt::Display + Copy>(
    label: &str,
    value: T,
    limit: T,
) -> Result<(), String> {
    if value <= limit {
        Ok(())
    } else {
        Err(format!("{label}: {value} exceeds {limit}"))
    }
}

const NON_CONTROLS: [&str; 5] = [
    "paper_example",
    "kahler_graph",
    "graph_with_kernel",
    "flat_submersion",
    "parabola_graph",
];

#[test]
fn criterion_01_paper_example_fidelity() {
    criterion(
        1,
        "paper example: defects < 1e-12, rank 2, ∇F_* ≡ 0, τ = 0 at 100 seeded points",
        || {
            let sc = scenario("paper_example");
            let (splits, _) = sc.prepare_points().map_err(|e| e.to_string())?;
            if splits.len() != 100 {
                return Err(format!("expected 100 points, got {}", splits.len()));
            }
            for split in &splits {
                let rd = sc
                    .map
                    .riemannian_defect_with_split(split, sc.mode)
                    .map_err(|e| e.to_string())?;
                check("riemannian defect", rd, 1e-12)?;
                let hd = sc
                    .map
                    .holomorphy_defect_at(&split.point, sc.mode)
                    .map_err(|e| e.to_string())?;
                check("holomorphy defect", hd, 1e-12)?;
                if split.rank != 2 {
                    return Err(format!("rank {} at {:?}", split.rank, split.point));
                }
                let sff = sc
                    .map
                    .sff_tensor_at(&split.point, sc.mode)
                    .map_err(|e| e.to_string())?;
                let sff_max = sff
                    .iter()
                    .flat_map(|t| t.iter())
                    .fold(0.0f64, |a, v| a.max(v.abs()));
                check("‖∇F_*‖", sff_max, 1e-12)?;
                let (tau, _, _) = sc
                    .map
                    .tension_with_split(split, sc.mode)
                    .map_err(|e| e.to_string())?;
                check("‖τ‖", tau.norm(), 1e-12)?;
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_02_curvature_anchor() {
    criterion(
        2,
        "sectional curvature of the (∂x,∂y) plane at the origin is −8 (1e-8 AD / 1e-4 FD)",
        || {
            for name in ["kahler_graph", "graph_with_kernel"] {
                for (mode, tol) in [(DerivMode::Jets, 1e-8), (DerivMode::FiniteDiff, 1e-4)] {
                    let sc = scenario_in_mode(name, mode);
                    let n = sc.map.source().dim();
                    let origin = vec![0.0; n];
                    let k = sc
                        .map
                        .source()
                        .sectional_curvature(&origin, &basis(n, 0), &basis(n, 1), mode)
                        .map_err(|e| e.to_string())?;
                    check(&format!("{name} ({}) |K + 8|", mode.name()), (k + 8.0).abs(), tol)?;
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_03_curvature_transfer_identity_closes() {
    criterion(
        3,
        "curvature-transfer identity: −8 = 0 − 2·4 at the origin (< 1e-10), < 1e-8 at 100 points",
        || {
            let sc = scenario("graph_with_kernel");
            let origin = vec![0.0; 4];
            let x = basis(4, 0);
            let source = sc.map.source();
            let target = sc.map.target();
            let j1 = source.complex_structure_at(&origin).map_err(|e| e.to_string())?;
            let jx = &j1 * &x;
            let r1 = source.curvature_at(&origin, sc.mode).map_err(|e| e.to_string())?;
            let t1 = contract_riemann(&r1.riem_down, &x, &jx, &jx, &x);

            let f0 = sc.map.eval(&origin).map_err(|e| e.to_string())?;
            let diff = sc.map.differential_at(&origin, sc.mode).map_err(|e| e.to_string())?;
            let fx = &diff.jacobian * &x;
            let j2 = target.complex_structure_at(&f0).map_err(|e| e.to_string())?;
            let jfx = &j2 * &fx;
            let r2 = target.curvature_at(&f0, sc.mode).map_err(|e| e.to_string())?;
            let t2 = contract_riemann(&r2.riem_down, &fx, &jfx, &jfx, &fx);

            let g2 = target.metric_at(&f0).map_err(|e| e.to_string())?;
            let sxx = sc
                .map
                .second_fund_form_at(&origin, &x, &x, sc.mode)
                .map_err(|e| e.to_string())?;
            let t3 = 2.0 * metric_dot(&g2, &sxx, &sxx);

            check("|t1 + 8|", (t1 + 8.0).abs(), 1e-10)?;
            check("|t2|", t2.abs(), 1e-10)?;
            check("|t3 - 8|", (t3 - 8.0).abs(), 1e-10)?;
            check("identity residual at origin", (t1 - t2 + t3).abs(), 1e-10)?;

            let (splits, _) = sc.prepare_points().map_err(|e| e.to_string())?;
            let agg = run_check(&sc, CheckId::HolomorphicCurvature, &splits)
                .map_err(|e| e.to_string())?;
            if agg.status != CheckStatus::Pass {
                return Err(format!("check status {:?}", agg.status));
            }
            check("max residual over 100 points", agg.max_residual, 1e-8)
        },
    );
}

#[test]
fn criterion_04_lemma_checks_on_non_controls() {
    criterion(
        4,
        "orthogonality, Gauss equation, invariance, sff commutation, S_V duality < 1e-8 on \
         every non-control scenario",
        || {
            let lemma_checks = [
                CheckId::GaussOrthogonality,
                CheckId::GaussEquation,
                CheckId::Invariance,
                CheckId::KahlerSffCommutation,
                CheckId::ShapeOperatorDuality,
            ];
            for name in NON_CONTROLS {
                let sc = scenario(name);
                let expected = entry(name).map_err(|e| e.to_string())?.expected;
                let (splits, _) = sc.prepare_points().map_err(|e| e.to_string())?;
                for id in lemma_checks {
                    let agg = run_check(&sc, id, &splits).map_err(|e| e.to_string())?;
                    let want = expected[&id];
                    if agg.status != want {
                        return Err(format!(
                            "{name}/{}: status {:?}, expected {:?}",
                            id.name(),
                            agg.status,
                            want
                        ));
                    }
                    if agg.status == CheckStatus::Pass {
                        check(&format!("{name}/{}", id.name()), agg.max_residual, 1e-8)?;
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_05_harmonicity_machinery() {
    criterion(
        5,
        "‖τ¹‖ < 1e-9, |‖τ‖ − r‖H‖| < 1e-8, harmonicity ⇔ minimality pointwise on \
         Kähler-source holomorphic scenarios",
        || {
            for name in [
                "paper_example",
                "kahler_graph",
                "graph_with_kernel",
                "flat_submersion",
            ] {
                let sc = scenario(name);
                let (splits, _) = sc.prepare_points().map_err(|e| e.to_string())?;
                for split in &splits {
                    let g2 = sc
                        .map
                        .target()
                        .metric_at(&split.target_point)
                        .map_err(|e| e.to_string())?;
                    let (tau, tau1, tau2) = sc
                        .map
                        .tension_with_split(split, sc.mode)
                        .map_err(|e| e.to_string())?;
                    let r = split.rank as f64;
                    let h = &tau2 / r;
                    let tau_norm = metric_dot(&g2, &tau, &tau).sqrt();
                    let tau1_norm = metric_dot(&g2, &tau1, &tau1).sqrt();
                    let h_norm = metric_dot(&g2, &h, &h).sqrt();
                    check(&format!("{name} ‖τ¹‖"), tau1_norm, 1e-9)?;
                    check(
                        &format!("{name} |‖τ‖ − r‖H‖|"),
                        (tau_norm - r * h_norm).abs(),
                        1e-8,
                    )?;
                    let harmonic = tau_norm <= sc.tolerances.residual;
                    let minimal = h_norm <= sc.tolerances.residual;
                    if harmonic != minimal {
                        return Err(format!(
                            "{name}: harmonic={harmonic} but minimal={minimal} at {:?}",
                            split.point
                        ));
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_06_structural_defects() {
    criterion(
        6,
        "Kähler defect < 1e-10 on Kähler charts, > 1e-2 on the non-Kähler control; \
         almost Hermitian defects < 1e-12",
        || {
            for e in riemap::gallery::entries() {
                let sc = scenario(e.name);
                let (splits, _) = sc.prepare_points().map_err(|e| e.to_string())?;
                let is_control = e.name == "non_kahler_source";
                let mut worst_kahler = 0.0f64;
                for split in &splits {
                    for (chart, point) in [
                        (sc.map.source(), &split.point),
                        (sc.map.target(), &split.target_point),
                    ] {
                        if !chart.has_complex_structure() {
                            continue;
                        }
                        let (dj, dc) = chart
                            .validate_almost_hermitian(point)
                            .map_err(|err| err.to_string())?;
                        check(&format!("{} J²+I", e.name), dj, 1e-12)?;
                        check(&format!("{} compatibility", e.name), dc, 1e-12)?;
                        let kd = chart
                            .kahler_defect(point, sc.mode)
                            .map_err(|err| err.to_string())?;
                        if is_control {
                            worst_kahler = worst_kahler.max(kd);
                        } else {
                            check(&format!("{} Kähler defect", e.name), kd, 1e-10)?;
                        }
                    }
                }
                if is_control && worst_kahler <= 1e-2 {
                    return Err(format!(
                        "non_kahler_source: max Kähler defect {worst_kahler:e} not above 1e-2"
                    ));
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_07_negative_controls() {
    criterion(
        7,
        "anti_holomorphic fails only holomorphy (≥ 1), non_riemannian fails only the \
         Riemannian defect (≥ 1); both match their declarations",
        || {
            for (name, failing) in [
                ("anti_holomorphic", CheckId::HolomorphyDefect),
                ("non_riemannian", CheckId::RiemannianDefect),
            ] {
                let sc = scenario(name);
                let report = sc.run_suite().map_err(|e| e.to_string())?;
                for agg in &report.checks {
                    if agg.check == failing {
                        if agg.status != CheckStatus::Fail {
                            return Err(format!(
                                "{name}: {} did not fail",
                                failing.name()
                            ));
                        }
                        if agg.max_residual < 1.0 {
                            return Err(format!(
                                "{name}: defect {:e} below 1",
                                agg.max_residual
                            ));
                        }
                    } else if agg.status == CheckStatus::Fail {
                        return Err(format!(
                            "{name}: unexpected failure of {}",
                            agg.check.name()
                        ));
                    }
                }
                let mismatches = outcome_mismatches(&report, &sc.expected);
                if !mismatches.is_empty() {
                    return Err(format!("{name}: expectation mismatches {mismatches:?}"));
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_08_ad_fd_oracle_equivalence() {
    criterion(
        8,
        "AD and FD residuals agree within 1e-4 per check; expression derivatives match \
         central differences (1e-6 gradient, 1e-4 Hessian)",
        || {
            for e in riemap::gallery::entries() {
                let ad = scenario_in_mode(e.name, DerivMode::Jets)
                    .run_suite()
                    .map_err(|err| err.to_string())?;
                let fd = scenario_in_mode(e.name, DerivMode::FiniteDiff)
                    .run_suite()
                    .map_err(|err| err.to_string())?;
                for (a, f) in ad.checks.iter().zip(fd.checks.iter()) {
                    if a.check != f.check {
                        return Err("check order differs between modes".to_string());
                    }
                    if a.status != f.status {
                        return Err(format!(
                            "{}/{}: AD {:?} vs FD {:?}",
                            e.name,
                            a.check.name(),
                            a.status,
                            f.status
                        ));
                    }
                    let diff = (a.max_residual - f.max_residual).abs();
                    check(&format!("{}/{} AD-FD", e.name, a.check.name()), diff, 1e-4)?;
                }

                // expression-level agreement on the charts and map components
                let sc = scenario(e.name);
                let mut rng = SplitMix64::new(977);
                let mut probe = |expr: &riemap::ExprAst,
                                 bounds: &[(f64, f64)]|
                 -> Result<(), String> {
                    for _ in 0..100 {
                        let p: Vec<f64> =
                            bounds.iter().map(|&(lo, hi)| rng.in_range(lo, hi)).collect();
                        let ad = expr.eval_jet(&p).map_err(|err| err.to_string())?;
                        let fd = expr.eval_jet_fd(&p, 1e-5, 1e-4).map_err(|err| err.to_string())?;
                        for i in 0..p.len() {
                            check(
                                &format!("{} grad[{i}] of `{expr}`", e.name),
                                (ad.gradient[i] - fd.gradient[i]).abs(),
                                1e-6,
                            )?;
                            for j in 0..p.len() {
                                check(
                                    &format!("{} hess[{i}{j}] of `{expr}`", e.name),
                                    (ad.hessian[(i, j)] - fd.hessian[(i, j)]).abs(),
                                    1e-4,
                                )?;
                            }
                        }
                    }
                    Ok(())
                };
                let source_box = sc.map.source().domain_box().to_vec();
                let target_box = sc.map.target().domain_box().to_vec();
                for expr in sc.map.source().expressions() {
                    probe(expr, &source_box)?;
                }
                for expr in sc.map.target().expressions() {
                    probe(expr, &target_box)?;
                }
                for expr in sc.map.components() {
                    probe(expr, &source_box)?;
                }
                for field in &sc.normal_fields {
                    for expr in field {
                        probe(expr, &target_box)?;
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_09_involutivity_and_rank_constancy() {
    criterion(
        9,
        "kernel involutivity defect < 1e-6 on non-control scenarios with a kernel; \
         rank constant at every sampled point",
        || {
            for name in NON_CONTROLS {
                let sc = scenario(name);
                let (splits, _) = sc.prepare_points().map_err(|e| e.to_string())?;
                let rank0 = splits[0].rank;
                if splits.iter().any(|s| s.rank != rank0) {
                    return Err(format!("{name}: rank varies across points"));
                }
                if splits[0].ker_frame.is_empty() {
                    continue;
                }
                for split in &splits {
                    let defect = sc
                        .map
                        .kernel_involutivity_defect_at(&split.point, sc.tolerances.rank, sc.mode)
                        .map_err(|e| e.to_string())?;
                    check(&format!("{name} involutivity"), defect, 1e-6)?;
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_10_report_determinism() {
    criterion(
        10,
        "identical manifest, seed, mode and tolerances yield byte-identical reports",
        || {
            for name in ["graph_with_kernel", "non_riemannian"] {
                let first = scenario(name).run_suite().map_err(|e| e.to_string())?;
                let second = scenario(name).run_suite().map_err(|e| e.to_string())?;
                let a = write_json(&first, None);
                let b = write_json(&second, None);
                if a != b {
                    return Err(format!("{name}: reports differ between identical runs"));
                }
            }
            Ok(())
        },
    );
}
