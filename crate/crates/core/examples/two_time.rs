//! A two-time functional on a qubit: sigma_z(t'') - sigma_z(t') takes three
//! values, more than any single qubit operator can.

use weakpath::measurement::{strong_statistics, weak_statistics};
use weakpath::pathways::{branches_for, enumerate_paths};
use weakpath::scenario::builtin;

fn main() -> weakpath::Result<()> {
    let spec = builtin("two_time_qubit")?;
    let paths = enumerate_paths(&spec)?;
    let (f, branches) = branches_for(&spec, &paths, spec.functional("diff")?)?;

    for (path, value) in paths.paths().zip(&f.values) {
        println!("path {path:?} -> {value:+}");
    }
    let weak = weak_statistics(&branches)?;
    let strong = strong_statistics(&branches)?;
    println!(
        "K = {} branch values {:?}",
        branches.len(),
        branches.branch_values
    );
    for k in 0..branches.len() {
        println!(
            "  f = {:+}  relative amplitude {:.4}  P = {:.4}",
            branches.branch_values[k], weak.relative_amplitudes[k], strong.probabilities[k]
        );
    }
    println!(
        "weak value {:.6}, strong mean {:.6}",
        weak.weak_value, strong.conditional_mean
    );
    Ok(())
}
