//! Load a scenario from JSON, report validation diagnostics, and compute the
//! weak value of every functional it defines.
//!
//! cargo run --example custom_scenario -- crates/core/scenarios/three_path.json

use weakpath::measurement::weak_statistics;
use weakpath::pathways::{branches_for, enumerate_paths};
use weakpath::scenario::parse_scenario;

const BROKEN: &str = r#"{
  "name": "broken",
  "dim": 2,
  "psi_initial": [[1, 0], [1, 0]],
  "psi_final": [[1, 0], [0, 0]],
  "segments": [[[[1, 0], [1, 0]], [[0, 0], [1, 0]]]],
  "slices": []
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("a document with an unnormalized state and a non-unitary segment:");
    if let Err(diagnostics) = parse_scenario(BROKEN.as_bytes()) {
        for d in diagnostics {
            println!("  {d}");
        }
    }

    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/nested_loop.json").into()
    });
    let spec = match parse_scenario(&std::fs::read(&path)?) {
        Ok(spec) => spec,
        Err(diagnostics) => {
            for d in diagnostics {
                eprintln!("{d}");
            }
            std::process::exit(2);
        }
    };
    let paths = enumerate_paths(&spec)?;
    println!(
        "{} ({} paths, digest {})",
        spec.name,
        paths.len(),
        &spec.digest()[..12]
    );
    for (name, def) in &spec.functionals {
        let (_, branches) = branches_for(&spec, &paths, def)?;
        match weak_statistics(&branches) {
            Ok(w) => println!("  {name:<16} B_w = {:.6}", w.weak_value),
            Err(e) => println!("  {name:<16} {e}"),
        }
    }
    Ok(())
}
