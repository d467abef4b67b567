//! The four-way tangent splitting of a map: kernel and horizontal frames on
//! the source, range and normal frames on the target, with the Riemannian
//! and holomorphy defects that classify the map.
//!
//! Run with `cargo run -p riemap --example tangent_splitting`.

use riemap::gallery::builtin_scenario;
use riemap::map::DEFAULT_RANK_TOL;
use riemap::DerivMode;

fn show_frame(label: &str, frame: &[nalgebra::DVector<f64>]) {
    if frame.is_empty() {
        println!("  {label}: (trivial)");
        return;
    }
    for (i, v) in frame.iter().enumerate() {
        let entries: Vec<String> = v.iter().map(|x| format!("{x:+.4}")).collect();
        println!("  {label}[{i}] = [{}]", entries.join(", "));
    }
}

fn main() -> riemap::Result<()> {
    let mode = DerivMode::Jets;

    // (x1..x4) ↦ ((x1+x3)/√2, (x2+x4)/√2, 0, 0): rank 2, with both a
    // 2-dimensional kernel and a 2-dimensional normal space.
    let scenario = builtin_scenario("paper_example")?.compile()?;
    let map = &scenario.map;
    let p = [0.3, -0.2, 0.6, 0.1];

    let diff = map.differential_at(&p, mode)?;
    println!("jacobian:\n{}", diff.jacobian);

    let split = map.tangent_split_at(&p, DEFAULT_RANK_TOL, mode)?;
    println!("rank = {}  singular values = {:?}", split.rank, split.singular_values);
    show_frame("ker", &split.ker_frame);
    show_frame("hor", &split.hor_frame);
    show_frame("range", &split.range_frame);
    show_frame("normal", &split.normal_frame);

    println!(
        "riemannian defect  = {:.3e}",
        map.riemannian_defect_at(&p, mode)?
    );
    println!(
        "holomorphy defect  = {:.3e}",
        map.holomorphy_defect_at(&p, mode)?
    );
    println!(
        "kernel involutivity defect = {:.3e}",
        map.kernel_involutivity_defect_at(&p, DEFAULT_RANK_TOL, mode)?
    );

    // Negative controls: the same machinery detects what fails.
    let squaring = builtin_scenario("non_riemannian")?.compile()?;
    println!(
        "\nz ↦ z² at (1,0): riemannian defect = {} (F_* stretches by |2z|)",
        squaring.map.riemannian_defect_at(&[1.0, 0.0], mode)?
    );
    let conjugation = builtin_scenario("anti_holomorphic")?.compile()?;
    println!(
        "conjugation: holomorphy defect = {} (J₂F_* = −F_*J₁)",
        conjugation.map.holomorphy_defect_at(&[0.7, 0.4], mode)?
    );
    Ok(())
}
