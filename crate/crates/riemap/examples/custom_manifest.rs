//! Author a scenario manifest from scratch, write it to disk, load it back
//! and run it — the same path the `riemap check <file>` command uses.
//!
//! The scenario: rotation by 45° of the complex line, z ↦ e^{iπ/4} z, which
//! is a holomorphic isometry, so every check passes.
//!
//! Run with `cargo run -p riemap --example custom_manifest`.

use riemap::manifest::{load_manifest, ManifoldSpec, SamplingSpec, ScenarioManifest};
use riemap::report::render_table;
use riemap::DerivMode;
use std::collections::BTreeMap;

fn main() -> riemap::Result<()> {
    let plane = |coords: [&str; 2]| ManifoldSpec {
        coords: coords.iter().map(|s| s.to_string()).collect(),
        metric: vec![
            vec!["1".into(), "0".into()],
            vec!["0".into(), "1".into()],
        ],
        complex_structure: Some(vec![
            vec!["0".into(), "-1".into()],
            vec!["1".into(), "0".into()],
        ]),
        domain_box: vec![[-2.0, 2.0], [-2.0, 2.0]],
    };

    let manifest = ScenarioManifest {
        name: "rotation_by_45_degrees".into(),
        description: "multiplication by e^{iπ/4}: a holomorphic isometry of the plane".into(),
        source: plane(["x", "y"]),
        target: plane(["w1", "w2"]),
        map: vec![
            "(x - y)/sqrt(2)".into(),
            "(x + y)/sqrt(2)".into(),
        ],
        normal_fields: vec![],
        sampling: SamplingSpec::Random {
            count: 50,
            seed: 7,
            bounds: None,
        },
        checks: None,
        tolerances: None,
        mode: DerivMode::Jets,
        expected: BTreeMap::new(),
    };

    // Validation collects every problem instead of stopping at the first.
    let problems = manifest.validate();
    assert!(problems.is_empty(), "{problems:?}");

    let dir = std::env::temp_dir();
    let path = dir.join("rotation_by_45_degrees.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())?;
    println!("wrote {}", path.display());

    let loaded = load_manifest(&path)?;
    let report = loaded.compile()?.run_suite()?;
    print!("{}", render_table(&report));

    let _ = std::fs::remove_file(&path);
    Ok(())
}
