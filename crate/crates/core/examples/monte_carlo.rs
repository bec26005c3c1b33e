//! Simulate individual runs of an accurate meter followed by post-selection
//! and compare the observed frequencies with the exact probabilities.
//!
//! cargo run --release --example monte_carlo -- 1000000 4

use weakpath::measurement::strong_statistics;
use weakpath::montecarlo::{estimate, sample_trials, trial_distribution, Partition};
use weakpath::pathways::{branches_for, enumerate_paths};
use weakpath::scenario::builtin;

fn main() -> weakpath::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let workers: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let spec = builtin("hadamard_qubit")?;
    let paths = enumerate_paths(&spec)?;
    let (_, branches) = branches_for(&spec, &paths, spec.functional("sz")?)?;
    let dist = trial_distribution(&spec, &paths, &branches)?;
    let tally = sample_trials(&dist, trials, 42, Partition { workers })?;
    let est = estimate(&tally, &branches.branch_values)?;
    let exact = strong_statistics(&branches)?;

    println!(
        "{trials} trials on {workers} worker(s), {} post-selected",
        est.successes
    );
    for k in 0..branches.len() {
        println!(
            "  f = {:+}  counts {:?}  ω = {:.5}  P = {:.5}",
            branches.branch_values[k], tally.counts[k], est.frequencies[k], dist.success[k]
        );
    }
    println!(
        "estimate {:.5} ± {:.5}, exact {:.5}",
        est.conditional_mean_estimate, est.std_error, exact.conditional_mean
    );
    Ok(())
}
