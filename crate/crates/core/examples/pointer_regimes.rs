//! Sweep the coupling-to-width ratio of a Gaussian pointer and watch the
//! normalized shift move from the weak value to the strong-measurement mean.
//!
//! cargo run --example pointer_regimes -- sweep.svg

use weakpath::cli::render_sweep_svg;
use weakpath::metersim::{regime_sweep, MeterConfig, Readout, DEFAULT_GRID_POINTS};
use weakpath::pathways::BranchDecomposition;
use weakpath::C64;

fn main() -> weakpath::Result<()> {
    // A two-valued meter whose branch amplitudes nearly cancel: the weak value
    // (about 10.9 - 1.2i) lies far outside the eigenvalue range [-1, 1].
    let branches = BranchDecomposition::from_branches(
        vec![1.0, -1.0],
        vec![C64::new(0.6, 0.0), C64::new(-0.5, 0.01)],
    )?;

    let ratios: Vec<f64> = (0..=10)
        .map(|j| 10f64.powf(-3.0 + 0.5 * j as f64))
        .collect();
    for readout in [Readout::Position, Readout::Momentum] {
        let meter = MeterConfig::new(1.0, 1.0, readout)?;
        let rows = regime_sweep(&branches, &meter, &ratios, DEFAULT_GRID_POINTS)?;
        println!("{readout:?} readout");
        println!("  {:>10} {:>12} {:>12}", "λ/σ", "shift/λ", "closed form");
        for r in &rows {
            println!(
                "  {:>10.3e} {:>12.6} {:>12.6}",
                r.ratio, r.normalized_shift, r.analytic_shift
            );
        }
        println!(
            "  weak {:?}  strong {:?}",
            rows[0].weak_prediction, rows[0].strong_prediction
        );
        if let (Some(path), Readout::Position) = (std::env::args().nth(1), readout) {
            std::fs::write(&path, render_sweep_svg(&rows, readout))?;
            println!("  plot written to {path}");
        }
    }
    Ok(())
}
