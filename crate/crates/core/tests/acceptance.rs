//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use weakpath::hilbert::LinearOperator;
use weakpath::measurement::{
    check_sum_rule, operator_weak_value, perturbation_check, strong_statistics, strong_sum_rule,
    weak_statistics,
};
use weakpath::metersim::{
    analytic_pointer_mean, entangle_and_postselect, pointer_mean, MeterConfig, Readout,
    DEFAULT_GRID_POINTS,
};
use weakpath::montecarlo::{estimate, sample_trials, trial_distribution, Partition};
use weakpath::pathways::{
    branches_for, coarse_grain, enumerate_paths, BranchDecomposition, FunctionalDef,
    PathFunctional, PathwaySet, DEFAULT_GRAIN_TOL,
};
use weakpath::scenario::{builtin, random_scenario, random_unitary, ScenarioSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn named_branches(spec: &ScenarioSpec, label: &str) -> Result<BranchDecomposition, String> {
    let paths = enumerate_paths(spec).map_err(e)?;
    let def = spec
        .functional(label)
        .or_else(|_| spec.meter(label).map(|(_, d)| d))
        .map_err(e)?
        .clone();
    Ok(branches_for(spec, &paths, &def).map_err(e)?.1)
}

fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// K ≤ 4 distinct values in [-2, 2] with random complex amplitudes whose sum
/// is kept away from zero.
fn random_branches(rng: &mut ChaCha8Rng) -> BranchDecomposition {
    loop {
        let k = rng.random_range(2..=4);
        let mut values: Vec<f64> = Vec::with_capacity(k);
        while values.len() < k {
            let v: f64 = rng.random_range(-2.0..2.0);
            if values.iter().all(|w| (w - v).abs() > 0.05) {
                values.push(v);
            }
        }
        let amps: Vec<C64> = (0..k).map(|_| random_complex(rng) * 0.5).collect();
        let total: C64 = amps.iter().sum();
        if total.norm() > 0.2 {
            return BranchDecomposition::from_branches(values, amps).expect("finite");
        }
    }
}

fn c1_null_trace() -> Outcome {
    let spec = builtin("three_path").map_err(e)?;
    let paths = enumerate_paths(&spec).map_err(e)?;
    let a = paths.amplitudes();
    for meter in ["O", "O'"] {
        let w = weak_statistics(&named_branches(&spec, meter)?).map_err(e)?;
        ensure(
            w.weak_value.norm() <= 1e-12,
            format!("{meter}: B_w = {}", w.weak_value),
        )?;
    }
    let w = weak_statistics(&named_branches(&spec, "pi_1")?).map_err(e)?;
    let expected = a[0] / a[2];
    ensure(
        (w.weak_value - expected).norm() <= 1e-12,
        format!("pi_1: B_w = {} vs A1/A3 = {expected}", w.weak_value),
    )?;
    ensure(w.weak_value.norm() > 1e-6, "pi_1 weak value vanishes")?;
    Ok(format!(
        "O, O' null; Π₁ weak value {} = A1/A3",
        w.weak_value
    ))
}

fn c2_blocked_arm() -> Outcome {
    let spec = builtin("blocked_arm").map_err(e)?;
    let paths = enumerate_paths(&spec).map_err(e)?;
    // Arm i is the path (i, i) through both slices.
    let arm = |i: usize| paths.amplitudes()[i * 3 + i];
    ensure(
        arm(0).norm() <= 1e-12 && arm(1).norm() <= 1e-12,
        "A1, A2 not blocked",
    )?;
    ensure(arm(2).norm() > 1e-6, "A3 vanishes")?;
    for label in ["pi_1", "pi_2", "union_12"] {
        let b = named_branches(&spec, label)?;
        ensure(
            b.amplitude_sum().norm() > 1e-6,
            format!("{label}: denominator vanishes"),
        )?;
        let w = weak_statistics(&b).map_err(e)?;
        ensure(
            w.weak_value.norm() <= 1e-12,
            format!("{label}: B_w = {}", w.weak_value),
        )?;
    }
    Ok(format!(
        "Π₁, Π₂, Π₁∪₂ null with ΣA = {}",
        paths.amplitude_sum()
    ))
}

fn strong_pointer(spec: &ScenarioSpec, label: &str) -> Result<(f64, f64), String> {
    let b = named_branches(spec, label)?;
    let strong = strong_statistics(&b).map_err(e)?;
    let meter = MeterConfig::new(10.0, 1.0, Readout::Position).map_err(e)?;
    let dist = entangle_and_postselect(&b, &meter, DEFAULT_GRID_POINTS).map_err(e)?;
    let mean = pointer_mean(&dist, Readout::Position).map_err(e)? / meter.coupling();
    Ok((mean, strong.conditional_mean))
}

fn c3_strong_limit() -> Outcome {
    let (m1, s1) = strong_pointer(&builtin("two_time_qubit").map_err(e)?, "diff")?;
    ensure((s1 - 1.0).abs() <= 1e-12, format!("two_time ⟨f⟩_s = {s1}"))?;
    ensure(
        (m1 - s1).abs() <= 1e-3,
        format!("two_time pointer {m1} vs {s1}"),
    )?;
    let (m2, s2) = strong_pointer(&builtin("hadamard_qubit").map_err(e)?, "sz")?;
    ensure(s2.abs() <= 1e-12, format!("hadamard ⟨f⟩_s = {s2}"))?;
    ensure(
        (m2 - s2).abs() <= 1e-3,
        format!("hadamard pointer {m2} vs {s2}"),
    )?;
    Ok(format!("λ/σ = 10: {m1:.6} vs 1, {m2:.2e} vs 0"))
}

fn c4_weak_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let b = random_branches(&mut rng);
        let re_bw = weak_statistics(&b).map_err(e)?.weak_value.re;
        let deviation = |lambda: f64| -> Result<f64, String> {
            let meter = MeterConfig::new(lambda, 1.0, Readout::Position).map_err(e)?;
            let dist = entangle_and_postselect(&b, &meter, DEFAULT_GRID_POINTS).map_err(e)?;
            Ok((pointer_mean(&dist, Readout::Position).map_err(e)? / lambda - re_bw).abs())
        };
        let r = deviation(1e-2)? / deviation(5e-3)?;
        ensure((r - 4.0).abs() <= 0.8, format!("ratio {r} outside 4 ± 20%"))?;
        ratios.push(r);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "deviation ratio in [{lo:.4}, {hi:.4}] over 20 sets"
    ))
}

fn c5_oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let b = random_branches(&mut rng);
        for ratio in [1e-3, 1e-1, 1.0, 10.0, 1e2] {
            let meter = MeterConfig::new(ratio, 1.0, Readout::Position).map_err(e)?;
            let dist = entangle_and_postselect(&b, &meter, DEFAULT_GRID_POINTS).map_err(e)?;
            let grid = pointer_mean(&dist, Readout::Position).map_err(e)?;
            let closed = analytic_pointer_mean(&b, &meter).map_err(e)?.position;
            let diff = (grid - closed).abs();
            worst = worst.max(diff);
            ensure(
                diff <= 1e-8,
                format!("λ/σ = {ratio}: grid {grid} vs closed form {closed}"),
            )?;
        }
    }
    Ok(format!("max |grid − closed form| = {worst:.2e}"))
}

fn c6_dual_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let dim = rng.random_range(2..=4);
        let slices = rng.random_range(1..=3);
        let spec = random_scenario(&mut rng, dim, slices);
        let l = rng.random_range(0..slices);
        let label = format!("t{l}");
        let name = format!("B@{label}");
        let b = named_branches(&spec, &name)?;
        let w = weak_statistics(&b).map_err(e)?.weak_value;
        let dual =
            operator_weak_value(&spec, &label, spec.observable(&name).map_err(e)?).map_err(e)?;
        let diff = (w - dual).norm();
        worst = worst.max(diff);
        ensure(diff <= 1e-10, format!("{}: {w} vs {dual}", spec.name))?;
    }
    Ok(format!(
        "max |Σ B_k α̃_k − dual| = {worst:.2e} over 100 scenarios"
    ))
}

/// Real functional orthogonal to both Re A and Im A, so Σ F_i A_i = 0.
fn null_table(rng: &mut ChaCha8Rng, paths: &PathwaySet) -> Vec<f64> {
    let re: Vec<f64> = paths.amplitudes().iter().map(|a| a.re).collect();
    let im: Vec<f64> = paths.amplitudes().iter().map(|a| a.im).collect();
    let mut f: Vec<f64> = (0..paths.len())
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in [re, im] {
        let mut u = v.clone();
        for q in &basis {
            let c = dot(&u, q);
            u.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let n = dot(&u, &u).sqrt();
        if n > 1e-9 {
            basis.push(u.iter().map(|x| x / n).collect());
        }
    }
    for _ in 0..2 {
        for q in &basis {
            let c = dot(&f, q);
            f.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
    f
}

fn c7_sum_rules() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut nulls, mut nonnulls) = (0, 0);
    for trial in 0..200 {
        let dim = rng.random_range(2..=4);
        let slices = rng.random_range(1..=2);
        let spec = random_scenario(&mut rng, dim, slices);
        let paths = enumerate_paths(&spec).map_err(e)?;
        let f = if trial % 2 == 0 {
            let values = null_table(&mut rng, &paths);
            PathFunctional::table(values).map_err(e)?
        } else {
            let def = spec.functional("B@t0").map_err(e)?.clone();
            branches_for(&spec, &paths, &def).map_err(e)?.0
        };
        let b = coarse_grain(&paths, &f, DEFAULT_GRAIN_TOL).map_err(e)?;
        let bw = weak_statistics(&b).map_err(e)?.weak_value.norm();
        let rule = check_sum_rule(&b, 1e-12);
        let weighted = rule.weighted_sum.norm();
        ensure(
            (bw <= 1e-12) == (weighted <= 1e-12),
            format!(
                "{}: |B_w| = {bw:.3e} but |Σ B_k Ã_k| = {weighted:.3e}",
                spec.name
            ),
        )?;
        ensure(
            (bw <= 1e-12) == rule.is_null,
            format!("{}: verdict disagrees with |B_w| = {bw:.3e}", spec.name),
        )?;
        if bw <= 1e-12 {
            nulls += 1;
        } else {
            nonnulls += 1;
        }
    }
    ensure(
        nulls > 0 && nonnulls > 0,
        "both kinds of instance must occur",
    )?;
    let b = named_branches(&builtin("hadamard_qubit").map_err(e)?, "sz")?;
    let amp = check_sum_rule(&b, 1e-12);
    ensure(
        amp.is_null,
        format!("hadamard σ_z amplitude sum {}", amp.weighted_sum),
    )?;
    let strong = strong_statistics(&b).map_err(e)?;
    let prob = strong_sum_rule(&strong, 1e-12);
    ensure(
        prob.is_null,
        format!("hadamard σ_z probability sum {}", prob.weighted_sum),
    )?;
    Ok(format!(
        "{nulls} null / {nonnulls} nonzero instances agree; hadamard σ_z satisfies both rules"
    ))
}

fn c8_monte_carlo() -> Outcome {
    const M: u64 = 1_000_000;
    let spec = builtin("hadamard_qubit").map_err(e)?;
    let paths = enumerate_paths(&spec).map_err(e)?;
    let def = spec.functional("sz").map_err(e)?.clone();
    let (_, b) = branches_for(&spec, &paths, &def).map_err(e)?;
    let dist = trial_distribution(&spec, &paths, &b).map_err(e)?;
    let strong = strong_statistics(&b).map_err(e)?;
    let start = Instant::now();
    let tally = sample_trials(&dist, M, 2024, Partition::default()).map_err(e)?;
    let elapsed = start.elapsed();
    let est = estimate(&tally, &b.branch_values).map_err(e)?;
    let bound = 5.0 / (M as f64).sqrt();
    for (k, (w, p)) in est.frequencies.iter().zip(&dist.success).enumerate() {
        ensure(
            (w - p).abs() <= bound,
            format!("branch {k}: ω = {w} vs P = {p}"),
        )?;
    }
    let dev = (est.conditional_mean_estimate - strong.conditional_mean).abs();
    ensure(
        dev <= 5.0 * est.std_error,
        format!("mean off by {dev} (se {})", est.std_error),
    )?;
    let again = sample_trials(&dist, M, 2024, Partition::default()).map_err(e)?;
    ensure(again == tally, "repeat with the same seed differs")?;
    ensure(elapsed.as_secs_f64() < 60.0, format!("took {elapsed:?}"))?;
    Ok(format!(
        "ω = {:?}, B̂_s = {:.5} ± {:.5}, reproducible, {:.2}s",
        est.frequencies,
        est.conditional_mean_estimate,
        est.std_error,
        elapsed.as_secs_f64()
    ))
}

fn c9_cardinality() -> Outcome {
    let b = named_branches(&builtin("two_time_qubit").map_err(e)?, "diff")?;
    ensure(b.len() == 3, format!("K = {}", b.len()))?;
    let mut values = b.branch_values.clone();
    values.sort_by(|a, b| b.total_cmp(a));
    ensure(
        values
            .iter()
            .zip([2.0, 0.0, -2.0])
            .all(|(v, w)| (v - w).abs() <= 1e-12),
        format!("values {values:?}"),
    )?;
    ensure(b.len() > 2, "not more than the qubit eigenvalue count")?;
    Ok(format!("K = 3 values {values:?} > 2 qubit eigenvalues"))
}

/// `W U₀` with `W = exp(iεH)`, `H` random hermitian with spectral norm ≤ 1.
fn perturbed(rng: &mut ChaCha8Rng, spec: &ScenarioSpec, eps: f64) -> ScenarioSpec {
    let dim = spec.dim;
    let frame = random_unitary(rng, dim);
    let phases: Vec<C64> = (0..dim)
        .map(|_| C64::from_polar(1.0, eps * rng.random_range(-1.0..1.0)))
        .collect();
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            entries[r * dim + c] = (0..dim)
                .map(|j| phases[j] * frame.get(r, j) * frame.get(c, j).conj())
                .sum();
        }
    }
    let w = LinearOperator::new(dim, entries).expect("square");
    let mut out = spec.clone();
    out.segments[0] = w.matmul(&spec.segments[0]).expect("same dims");
    out
}

fn c10_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for name in weakpath::scenario::BUILTIN_NAMES {
        let spec = builtin(name).map_err(e)?;
        for label in spec.functionals.keys() {
            let b = named_branches(&spec, label)?;
            let Ok(s) = strong_statistics(&b) else {
                continue;
            };
            for (a, p) in b.branch_amplitudes.iter().zip(&s.probabilities) {
                ensure(
                    (a.norm() - p.sqrt()).abs() <= 1e-12,
                    format!("{name}/{label}: |Ã| ≠ √P"),
                )?;
            }
        }
    }
    let eps = 1e-4;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let dim = rng.random_range(2..=4);
        let slices = rng.random_range(1..=3);
        let spec = random_scenario(&mut rng, dim, slices);
        let paths = enumerate_paths(&spec).map_err(e)?;
        for b in [&named_branches(&spec, "B@t0")?] {
            if let Ok(s) = strong_statistics(b) {
                for (a, p) in b.branch_amplitudes.iter().zip(&s.probabilities) {
                    ensure((a.norm() - p.sqrt()).abs() <= 1e-12, "random: |Ã| ≠ √P")?;
                }
            }
        }
        let shifted = enumerate_paths(&perturbed(&mut rng, &spec, eps)).map_err(e)?;
        let delta: Vec<C64> = shifted
            .amplitudes()
            .iter()
            .zip(paths.amplitudes())
            .map(|(x, y)| x - y)
            .collect();
        let report = perturbation_check(&paths, &delta).map_err(e)?;
        worst = worst.max(report.max_deviation);
        ensure(
            report.max_deviation <= 10.0 * eps * eps,
            format!(
                "{}: |exact − linear| = {:.3e}",
                spec.name, report.max_deviation
            ),
        )?;
    }
    Ok(format!(
        "|Ã_k| = √P_k; max |exact − linear| = {worst:.2e} ≤ {:.0e}",
        10.0 * eps * eps
    ))
}

fn c11_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut specs: Vec<ScenarioSpec> = weakpath::scenario::BUILTIN_NAMES
        .iter()
        .map(|n| builtin(n).expect("built-in"))
        .collect();
    for _ in 0..50 {
        let dim = rng.random_range(2..=4);
        let slices = rng.random_range(1..=3);
        specs.push(random_scenario(&mut rng, dim, slices));
    }
    for spec in &specs {
        let paths = enumerate_paths(spec).map_err(e)?;
        let total = spec.transition_amplitude().map_err(e)?;
        ensure(
            (paths.amplitude_sum() - total).norm() <= 1e-10,
            format!(
                "{}: Σ A_i = {} vs {total}",
                spec.name,
                paths.amplitude_sum()
            ),
        )?;
        for (label, def) in &spec.functionals {
            let (_, b) = branches_for(spec, &paths, def).map_err(e)?;
            ensure(
                (b.amplitude_sum() - total).norm() <= 1e-10,
                format!("{}/{label}: Σ Ã_k ≠ transition amplitude", spec.name),
            )?;
        }

        // Global phase on both boundary states.
        let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let mut rotated = spec.clone();
        rotated.psi_initial = spec.psi_initial.scale(phase);
        rotated.psi_final = spec
            .psi_final
            .scale(phase.conj() * C64::from_polar(1.0, 0.7));
        let rotated_paths = enumerate_paths(&rotated).map_err(e)?;
        for (a, r) in paths.amplitudes().iter().zip(rotated_paths.amplitudes()) {
            ensure(
                (a.norm() - r.norm()).abs() <= 1e-10,
                format!("{}: |A_i| not phase invariant", spec.name),
            )?;
        }
        for (label, def) in &spec.functionals {
            let (_, b) = branches_for(spec, &paths, def).map_err(e)?;
            let (_, rb) = branches_for(&rotated, &rotated_paths, def).map_err(e)?;
            if let (Ok(s), Ok(rs)) = (strong_statistics(&b), strong_statistics(&rb)) {
                for (p, q) in s.probabilities.iter().zip(&rs.probabilities) {
                    ensure(
                        (p - q).abs() <= 1e-10,
                        format!("{}/{label}: P_k not phase invariant", spec.name),
                    )?;
                }
            }
            if let (Ok(w), Ok(rw)) = (weak_statistics(&b), weak_statistics(&rb)) {
                ensure(
                    (w.weak_value - rw.weak_value).norm() <= 1e-10,
                    format!("{}/{label}: B_w not phase invariant", spec.name),
                )?;
            }
        }

        // Projector and its complement; projectors over a full slice basis.
        for slice in &spec.slices {
            let mut sum = C64::new(0.0, 0.0);
            for index in 0..slice.len() {
                let def = FunctionalDef::Projector {
                    slice: slice.label.clone(),
                    index,
                };
                let (f, b) = branches_for(spec, &paths, &def).map_err(e)?;
                let w = weak_statistics(&b).map_err(e)?.weak_value;
                sum += w;
                let complement =
                    PathFunctional::table(f.values.iter().map(|v| 1.0 - v).collect()).map_err(e)?;
                let cb = coarse_grain(&paths, &complement, DEFAULT_GRAIN_TOL).map_err(e)?;
                let cw = weak_statistics(&cb).map_err(e)?.weak_value;
                ensure(
                    (w + cw - 1.0).norm() <= 1e-10,
                    format!("{}: Π + (1 − Π) weak values sum to {}", spec.name, w + cw),
                )?;
            }
            ensure(
                (sum - 1.0).norm() <= 1e-10,
                format!("{}/{}: Σ_j Π_j weak values = {sum}", spec.name, slice.label),
            )?;
        }
    }
    Ok(format!(
        "{} scenarios: conservation, phase invariance, complements",
        specs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("null trace on the three-path interferometer", c1_null_trace),
        ("blocked arm gives null weak values", c2_blocked_arm),
        ("pointer mean reaches the strong limit", c3_strong_limit),
        (
            "pointer mean approaches the weak value quadratically",
            c4_weak_limit,
        ),
        (
            "closed-form pointer mean matches grid integration",
            c5_oracle_agreement,
        ),
        ("path-sum weak value equals the dual form", c6_dual_form),
        ("amplitude and probability sum rules", c7_sum_rules),
        (
            "Monte Carlo convergence and reproducibility",
            c8_monte_carlo,
        ),
        (
            "functional with more values than eigenvalues",
            c9_cardinality,
        ),
        ("amplitude and perturbation identities", c10_identities),
        ("structural invariants", c11_invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
