//! Enumerate the virtual paths of a built-in scenario and check that their
//! amplitudes add up to the full transition amplitude.
//!
//! cargo run --example path_amplitudes -- nested_loop

use weakpath::pathways::enumerate_paths;
use weakpath::scenario::builtin;

fn main() -> weakpath::Result<()> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "three_path".into());
    let spec = builtin(&name)?;
    let paths = enumerate_paths(&spec)?;

    println!(
        "{name}: {} paths over slices {:?}",
        paths.len(),
        paths.slice_labels()
    );
    for (i, (path, a)) in paths.paths().zip(paths.amplitudes()).enumerate() {
        println!("  {i:>3} {path:?}  A = {:+.6} {:+.6}i", a.re, a.im);
    }
    let total = spec.transition_amplitude()?;
    println!("sum of path amplitudes  {:.12}", paths.amplitude_sum());
    println!("<psi_F|U|psi_I>         {total:.12}");
    Ok(())
}
