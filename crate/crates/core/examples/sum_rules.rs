//! Null weak values and the sum rules behind them.
//!
//! A weak value vanishes exactly when Σ F_k Ã_k = 0. For the Hadamard qubit
//! the strong probabilities obey the same rule, Σ F_k P_k = 0.

use weakpath::measurement::{check_sum_rule, strong_statistics, strong_sum_rule, weak_statistics};
use weakpath::pathways::{branches_for, enumerate_paths};
use weakpath::scenario::builtin;

fn main() -> weakpath::Result<()> {
    for (name, functional) in [
        ("hadamard_qubit", "sz"),
        ("hadamard_qubit", "pi_0"),
        ("three_path", "union_12"),
        ("three_path", "pi_1"),
        ("two_time_qubit", "diff"),
    ] {
        let spec = builtin(name)?;
        let paths = enumerate_paths(&spec)?;
        let (_, branches) = branches_for(&spec, &paths, spec.functional(functional)?)?;
        let weak = weak_statistics(&branches)?;
        let amplitude_rule = check_sum_rule(&branches, 1e-12);
        let probability_rule = strong_sum_rule(&strong_statistics(&branches)?, 1e-12);
        let verdict = |null: bool| if null { "NULL" } else { "NONZERO" };
        println!(
            "{name:<15} {functional:<9} B_w = {:+.4}  Σ F Ã {:<7}  Σ F P {}",
            weak.weak_value,
            verdict(amplitude_rule.is_null),
            verdict(probability_rule.is_null)
        );
    }
    Ok(())
}
