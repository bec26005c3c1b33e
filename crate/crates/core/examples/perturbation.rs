//! Probabilities respond to a small change of the path amplitudes only
//! through the interference term 2 Re[conj(A) δA], up to |δA|².

use weakpath::measurement::perturbation_check;
use weakpath::pathways::enumerate_paths;
use weakpath::scenario::builtin;
use weakpath::C64;

fn main() -> weakpath::Result<()> {
    let spec = builtin("three_path")?;
    let paths = enumerate_paths(&spec)?;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let delta: Vec<C64> = (0..paths.len())
            .map(|i| C64::from_polar(eps, 0.9 * i as f64))
            .collect();
        let report = perturbation_check(&paths, &delta)?;
        println!(
            "ε = {eps:.0e}  max |exact − linear| = {:.3e}  (ε² = {:.0e}){}",
            report.max_deviation,
            eps * eps,
            if report.large_perturbation {
                "  large"
            } else {
                ""
            }
        );
    }
    Ok(())
}
