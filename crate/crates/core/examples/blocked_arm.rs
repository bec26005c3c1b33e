//! Blocking two arms of the nested loop: every amplitude through the
//! blocked arms is zero, so the weak values there vanish while the
//! post-selection probability stays finite.

use weakpath::measurement::{strong_statistics, weak_statistics};
use weakpath::pathways::{branches_for, enumerate_paths};
use weakpath::scenario::builtin;

fn main() -> weakpath::Result<()> {
    let spec = builtin("blocked_arm")?;
    let paths = enumerate_paths(&spec)?;
    println!("transition amplitude {:.6}", spec.transition_amplitude()?);
    for name in ["pi_1", "pi_2", "pi_3", "union_12"] {
        let (_, branches) = branches_for(&spec, &paths, spec.functional(name)?)?;
        let weak = weak_statistics(&branches)?;
        let strong = strong_statistics(&branches)?;
        println!(
            "{name:<9} B_w = {:+.3e}  post-selection {:.6}",
            weak.weak_value.re, strong.postselect_prob
        );
    }
    Ok(())
}
