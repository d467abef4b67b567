//! Second-order calculus of a map: the second fundamental form ∇F_*, the
//! tension field with its kernel/horizontal split, mean curvature of the
//! range, and the shape operator of a normal field.
//!
//! Run with `cargo run -p riemap --example second_fundamental_form`.

use nalgebra::DVector;
use riemap::gallery::builtin_scenario;
use riemap::linalg::metric_dot;
use riemap::map::DEFAULT_RANK_TOL;
use riemap::{DerivMode, ExprAst};

fn axis(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn main() -> riemap::Result<()> {
    let mode = DerivMode::Jets;

    // (x,y,u,v) ↦ (x, y, x²−y², 2xy) with the pullback source metric: a
    // curved holomorphic Riemannian map with kernel span(∂u, ∂v).
    let scenario = builtin_scenario("graph_with_kernel")?.compile()?;
    let map = &scenario.map;
    let origin = [0.0; 4];

    let xx = map.second_fund_form_at(&origin, &axis(4, 0), &axis(4, 0), mode)?;
    let xy = map.second_fund_form_at(&origin, &axis(4, 0), &axis(4, 1), mode)?;
    let yy = map.second_fund_form_at(&origin, &axis(4, 1), &axis(4, 1), mode)?;
    println!("(∇F_*)(∂x,∂x) = {:?}", xx.as_slice());
    println!("(∇F_*)(∂x,∂y) = {:?}", xy.as_slice());
    println!("(∇F_*)(∂y,∂y) = {:?}", yy.as_slice());

    // The diagonal values cancel, so the map is harmonic and the range
    // distribution is minimal; the kernel trace vanishes on its own.
    let (tau, tau1, tau2) = map.tension_at(&origin, mode)?;
    println!(
        "‖τ‖ = {:.2e}, ‖τ¹‖ = {:.2e}, ‖τ²‖ = {:.2e}",
        tau.norm(),
        tau1.norm(),
        tau2.norm()
    );
    let h = map.mean_curvature_range_at(&origin, mode)?;
    println!("mean curvature of range F_*: ‖H‖ = {:.2e}", h.norm());

    // Shape operator of the normal field V = (−2z1, 2z2, 1, 0) and its
    // duality with ∇F_*: g2(S_V F_*X, F_*Y) = g2(V, (∇F_*)(X,Y)).
    let v_field: Vec<ExprAst> = ["-2*z1", "2*z2", "1", "0"]
        .iter()
        .map(|s| ExprAst::parse(s, map.target().coords()))
        .collect::<riemap::Result<_>>()?;
    let split = map.tangent_split_at(&origin, DEFAULT_RANK_TOL, mode)?;
    let data = map.shape_operator_with_split(&split, &v_field, mode)?;
    println!("S_V on the horizontal frame:\n{}", data.s_matrix);

    let g2 = map.target().metric_at(&split.target_point)?;
    let mut v_val = DVector::zeros(4);
    for (i, comp) in v_field.iter().enumerate() {
        v_val[i] = comp.eval_value(&split.target_point)?;
    }
    let sff = map.second_fund_form_at(&origin, &split.hor_frame[0], &split.hor_frame[0], mode)?;
    println!(
        "duality: S_V entry = {:.6}, g2(V, ∇F_*) = {:.6}",
        data.s_matrix[(0, 0)],
        metric_dot(&g2, &v_val, &sff)
    );

    // A non-minimal contrast: the parabola graph has ‖H‖ = 2 at its vertex.
    let parabola = builtin_scenario("parabola_graph")?.compile()?;
    let h = parabola.map.mean_curvature_range_at(&[0.0, 0.0], mode)?;
    println!("parabola graph: ‖H‖ at the vertex = {}", h.norm());
    Ok(())
}
