//! Export every gallery scenario as an editable manifest file — handy
//! starting points for custom scenarios.
//!
//! Run with `cargo run -p riemap --example export_manifests [output-dir]`
//! (default `manifests/`).

use riemap::gallery::{builtin_scenario, entries};
use std::path::PathBuf;

fn main() -> riemap::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "manifests".to_string())
        .into();
    std::fs::create_dir_all(&dir)?;
    for entry in entries() {
        let manifest = builtin_scenario(entry.name)?;
        let path = dir.join(format!("{}.json", entry.name));
        let mut json = serde_json::to_string_pretty(&manifest)?;
        json.push('\n');
        std::fs::write(&path, json)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
