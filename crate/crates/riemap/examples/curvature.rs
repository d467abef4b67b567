//! Chart geometry: metrics, Christoffel symbols, Riemann curvature,
//! sectional and holomorphic sectional curvature, and the Kähler defect.
//!
//! Run with `cargo run -p riemap --example curvature`.

use nalgebra::DVector;
use riemap::{ChartManifold, DerivMode};

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn axis(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn main() -> riemap::Result<()> {
    let mode = DerivMode::Jets;

    // A conformal 2-plane stacked on a flat 2-plane, with the standard
    // complex structure: the source chart of the graph scenarios.
    let lambda = "1 + 4*(x^2 + y^2)";
    let chart = ChartManifold::new(
        names(&["x", "y", "u", "v"]),
        &[
            vec![lambda.into(), "0".into(), "0".into(), "0".into()],
            vec!["0".into(), lambda.into(), "0".into(), "0".into()],
            vec!["0".into(), "0".into(), "1".into(), "0".into()],
            vec!["0".into(), "0".into(), "0".into(), "1".into()],
        ],
        Some(&[
            vec!["0".into(), "-1".into(), "0".into(), "0".into()],
            vec!["1".into(), "0".into(), "0".into(), "0".into()],
            vec!["0".into(), "0".into(), "0".into(), "-1".into()],
            vec!["0".into(), "0".into(), "1".into(), "0".into()],
        ]),
        vec![(-1.0, 1.0); 4],
    )?;

    let p = [1.0, 0.0, 0.0, 0.0];
    println!("metric at {p:?}:\n{}", chart.metric_at(&p)?);

    let conn = chart.christoffel_at(&p, mode)?;
    println!("Γ^x_xx = {}  (∂_x λ / 2λ = 8/10)", conn.gamma.get(0, 0, 0));

    // Sectional curvature of the conformal block: K = -(Δ log λ)/(2λ).
    let origin = [0.0; 4];
    let k = chart.sectional_curvature(&origin, &axis(4, 0), &axis(4, 1), mode)?;
    println!("sectional curvature of the (∂x, ∂y) plane at the origin = {k}");

    // The same plane is (X, JX) for X = ∂x, so the holomorphic sectional
    // curvature agrees, and it is scale-invariant.
    let h = chart.holomorphic_sectional_curvature(&origin, &axis(4, 0), mode)?;
    let h3 = chart.holomorphic_sectional_curvature(&origin, &(axis(4, 0) * 3.0), mode)?;
    println!("holomorphic sectional curvature H(∂x) = {h}, H(3∂x) = {h3}");

    // Structural measures: J² = -I, metric compatibility, and ∇J = 0.
    let (dj2, dcompat) = chart.validate_almost_hermitian(&p)?;
    println!("almost Hermitian defects: ‖J²+I‖ = {dj2:.1e}, ‖JᵀgJ−g‖ = {dcompat:.1e}");
    println!("Kähler defect ‖∇J‖ = {:.1e}", chart.kahler_defect(&p, mode)?);

    // Positive curvature sanity check: a round 2-sphere chart has K = 1.
    let sphere = ChartManifold::new(
        names(&["th", "ph"]),
        &[
            vec!["1".into(), "0".into()],
            vec!["0".into(), "sin(th)^2".into()],
        ],
        None,
        vec![(0.4, 2.7), (0.0, 6.0)],
    )?;
    let k_sphere = sphere.sectional_curvature(&[1.2, 0.5], &axis(2, 0), &axis(2, 1), mode)?;
    println!("round sphere sectional curvature = {k_sphere}");

    // A conformal factor depending on u breaks the Kähler condition.
    let non_kahler = ChartManifold::new(
        names(&["x", "y", "u", "v"]),
        &[
            vec!["1 + u^2".into(), "0".into(), "0".into(), "0".into()],
            vec!["0".into(), "1 + u^2".into(), "0".into(), "0".into()],
            vec!["0".into(), "0".into(), "1".into(), "0".into()],
            vec!["0".into(), "0".into(), "0".into(), "1".into()],
        ],
        Some(&[
            vec!["0".into(), "-1".into(), "0".into(), "0".into()],
            vec!["1".into(), "0".into(), "0".into(), "0".into()],
            vec!["0".into(), "0".into(), "0".into(), "-1".into()],
            vec!["0".into(), "0".into(), "1".into(), "0".into()],
        ]),
        vec![(-1.5, 1.5); 4],
    )?;
    println!(
        "non-Kähler control: ∇J defect at (0,0,1,0) = {}",
        non_kahler.kahler_defect(&[0.0, 0.0, 1.0, 0.0], mode)?
    );
    Ok(())
}
