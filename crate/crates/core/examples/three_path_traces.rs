//! Weak and strong readings of the four meters O, E, E', O' in the
//! three-path interferometer and its nested-loop form.
//!
//! Meters whose weak value vanishes leave no trace on a weakly coupled
//! pointer even though the post-selected particle "could" have passed them.

use weakpath::measurement::{strong_statistics, weak_statistics};
use weakpath::pathways::{branches_for, enumerate_paths};
use weakpath::scenario::builtin;

fn main() -> weakpath::Result<()> {
    for name in ["three_path", "nested_loop"] {
        let spec = builtin(name)?;
        let paths = enumerate_paths(&spec)?;
        println!("{name}");
        println!(
            "  {:<4} {:<16} {:>14} {:>12} {:>12}",
            "mtr", "functional", "Re B_w", "P(f=1)", "<f>_s"
        );
        for label in ["O", "E", "E'", "O'"] {
            let (functional, def) = spec.meter(label)?;
            let (_, branches) = branches_for(&spec, &paths, def)?;
            let weak = weak_statistics(&branches)?;
            let strong = strong_statistics(&branches)?;
            let p_one = branches
                .branch_values
                .iter()
                .zip(&strong.probabilities)
                .filter(|(v, _)| (**v - 1.0).abs() < 1e-9)
                .map(|(_, p)| *p)
                .sum::<f64>();
            let trace = if weak.weak_value.norm() < 1e-12 {
                "no trace"
            } else {
                ""
            };
            println!(
                "  {label:<4} {functional:<16} {:>14.6} {p_one:>12.6} {:>12.6}  {trace}",
                weak.weak_value.re, strong.conditional_mean
            );
        }
    }
    Ok(())
}
