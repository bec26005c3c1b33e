//! Repeated strong-measurement trials with post-selection.
//!
//! Every trial records the branch `k` the accurate meter reports and the
//! post-selection flag `ξ = ±1`. The joint law is
//!
//! ```text
//! P(k, +1) = |Ã_k|²        P(k, -1) = q_k - |Ã_k|²
//! ```
//!
//! where `q_k = ‖χ_k‖²` is the unconditional branch probability and `χ_k` the
//! (unnormalized) final state reached through the branch's member paths.
//!
//! Sampling uses ChaCha8 streams. Worker `w` of a partition is seeded with
//! `seed ^ w` and draws a contiguous share of the trials, so a tally is
//! reproducible for a fixed `(seed, workers)` pair.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{apply, StateVector, C64};
use crate::pathways::{BranchDecomposition, PathwaySet};
use crate::scenario::ScenarioSpec;

/// Negative cell probabilities down to this are rounding noise and clamped.
const CLAMP_FLOOR: f64 = -1e-12;
const NORMALIZATION_TOL: f64 = 1e-10;

/// Post-selection outcome `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn xi(self) -> i8 {
        match self {
            Outcome::Success => 1,
            Outcome::Failure => -1,
        }
    }
}

/// Joint law of `(k, ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialDistribution {
    pub success: Vec<f64>,
    pub failure: Vec<f64>,
    /// Unconditional branch probabilities `q_k`.
    pub branch_probabilities: Vec<f64>,
}

impl TrialDistribution {
    pub fn from_cells(success: Vec<f64>, failure: Vec<f64>) -> Result<Self> {
        if success.len() != failure.len() {
            return Err(Error::DimensionMismatch {
                left: success.len(),
                right: failure.len(),
            });
        }
        let branch_probabilities = success.iter().zip(&failure).map(|(s, f)| s + f).collect();
        let dist = Self {
            success,
            failure,
            branch_probabilities,
        };
        dist.check()?;
        Ok(dist)
    }

    pub fn branch_count(&self) -> usize {
        self.success.len()
    }

    pub fn cell(&self, branch: usize, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Success => self.success[branch],
            Outcome::Failure => self.failure[branch],
        }
    }

    /// Cells in `(k, +1), (k, -1)` order for `k = 0..K`.
    pub fn cells(&self) -> impl Iterator<Item = f64> + '_ {
        self.success
            .iter()
            .zip(&self.failure)
            .flat_map(|(&s, &f)| [s, f])
    }

    fn check(&self) -> Result<()> {
        let total: f64 = self.cells().sum();
        if self.cells().any(|p| !(p >= 0.0)) || (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NumericalFailure(format!(
                "trial distribution is not a probability law (total {total})"
            )));
        }
        Ok(())
    }
}

fn clamp(p: f64) -> Result<f64> {
    if p >= 0.0 {
        Ok(p)
    } else if p >= CLAMP_FLOOR {
        Ok(0.0)
    } else {
        Err(Error::NumericalFailure(format!(
            "negative cell probability {p:e}"
        )))
    }
}

/// Joint distribution of branch outcome and post-selection flag.
pub fn trial_distribution(
    scenario: &ScenarioSpec,
    paths: &PathwaySet,
    branches: &BranchDecomposition,
) -> Result<TrialDistribution> {
    paths.check_structure(scenario)?;
    let n_slices = scenario.slices.len();
    // Final-state image of every basis vector of the last slice.
    let images: Vec<StateVector> = match scenario.slices.last() {
        Some(last) => last
            .basis
            .iter()
            .map(|b| apply(&scenario.segments[n_slices], b))
            .collect::<Result<_>>()?,
        None => vec![scenario.forward_state(0)?],
    };
    let mut success = Vec::with_capacity(branches.len());
    let mut failure = Vec::with_capacity(branches.len());
    let mut qs = Vec::with_capacity(branches.len());
    for (members, amp) in branches
        .branch_members
        .iter()
        .zip(&branches.branch_amplitudes)
    {
        // χ_k = Σ_{i∈k} c_i U_L|b_{i_L}⟩
        let mut weights = vec![C64::new(0.0, 0.0); images.len()];
        for &i in members {
            let last = if n_slices == 0 {
                0
            } else {
                paths.path(i)[n_slices - 1]
            };
            weights[last] += paths.prefinal()[i];
        }
        let mut chi = vec![C64::new(0.0, 0.0); scenario.dim];
        for (w, img) in weights.iter().zip(&images) {
            for (c, e) in chi.iter_mut().zip(img.entries()) {
                *c += w * e;
            }
        }
        let q: f64 = chi.iter().map(|c| c.norm_sqr()).sum();
        let p_success = amp.norm_sqr();
        success.push(clamp(p_success)?);
        failure.push(clamp(q - p_success)?);
        qs.push(q);
    }
    let dist = TrialDistribution {
        success,
        failure,
        branch_probabilities: qs,
    };
    dist.check()?;
    Ok(dist)
}

/// Sampling partition; part of the reproducibility contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub workers: usize,
}

impl Default for Partition {
    fn default() -> Self {
        Self { workers: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialTally {
    pub trials: u64,
    /// `counts[k] = [M(k, +1), M(k, -1)]`.
    pub counts: Vec<[u64; 2]>,
    pub seed: u64,
    pub partition: Partition,
}

impl TrialTally {
    pub fn empty(branches: usize, seed: u64, partition: Partition) -> Self {
        Self {
            trials: 0,
            counts: vec![[0, 0]; branches],
            seed,
            partition,
        }
    }

    pub fn count(&self, branch: usize, outcome: Outcome) -> u64 {
        self.counts[branch][match outcome {
            Outcome::Success => 0,
            Outcome::Failure => 1,
        }]
    }

    pub fn successes(&self) -> u64 {
        self.counts.iter().map(|c| c[0]).sum()
    }

    /// Add another tally's counts (associative and commutative).
    pub fn merge(&mut self, other: &TrialTally) -> Result<()> {
        if self.counts.len() != other.counts.len() {
            return Err(Error::DimensionMismatch {
                left: self.counts.len(),
                right: other.counts.len(),
            });
        }
        self.trials += other.trials;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a[0] += b[0];
            a[1] += b[1];
        }
        Ok(())
    }
}

fn sample_block(weights: &[f64], trials: u64, seed: u64, branches: usize) -> Result<Vec<[u64; 2]>> {
    let mut counts = vec![[0u64; 2]; branches];
    if trials == 0 {
        return Ok(counts);
    }
    let index = WeightedIndex::new(weights)
        .map_err(|e| Error::NumericalFailure(format!("cannot sample trial law: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let cell = index.sample(&mut rng);
        counts[cell / 2][cell % 2] += 1;
    }
    Ok(counts)
}

/// Draw `trials` independent `(k, ξ)` outcomes.
pub fn sample_trials(
    dist: &TrialDistribution,
    trials: u64,
    seed: u64,
    partition: Partition,
) -> Result<TrialTally> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    if partition.workers == 0 {
        return Err(Error::InvalidArgument(
            "at least one worker is required".into(),
        ));
    }
    let weights: Vec<f64> = dist.cells().collect();
    let k = dist.branch_count();
    let w = partition.workers as u64;
    let shares: Vec<u64> = (0..w)
        .map(|i| trials / w + u64::from(i < trials % w))
        .collect();

    let blocks: Vec<Result<Vec<[u64; 2]>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = shares
            .iter()
            .enumerate()
            .map(|(i, &share)| {
                let weights = &weights;
                scope.spawn(move || sample_block(weights, share, seed ^ i as u64, k))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampling worker panicked"))
            .collect()
    });

    let mut tally = TrialTally::empty(k, seed, partition);
    for (block, share) in blocks.into_iter().zip(shares) {
        let part = TrialTally {
            trials: share,
            counts: block?,
            seed,
            partition,
        };
        tally.merge(&part)?;
    }
    Ok(tally)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorResult {
    /// `ω_k = M(k, +1) / M`.
    pub frequencies: Vec<f64>,
    pub conditional_mean_estimate: f64,
    pub std_error: f64,
    pub successes: u64,
    /// Reference `P_k`, when attached with [`EstimatorResult::with_exact`].
    pub exact_probabilities: Option<Vec<f64>>,
}

impl EstimatorResult {
    pub fn with_exact(mut self, dist: &TrialDistribution) -> Self {
        self.exact_probabilities = Some(dist.success.clone());
        self
    }
}

/// Frequencies and the post-selected sample mean of the branch values.
///
/// The standard error is that of a sample mean over the `n` successful
/// trials, `sqrt(Var/n)` with the plug-in variance of the branch values.
pub fn estimate(tally: &TrialTally, branch_values: &[f64]) -> Result<EstimatorResult> {
    if branch_values.len() != tally.counts.len() {
        return Err(Error::DimensionMismatch {
            left: branch_values.len(),
            right: tally.counts.len(),
        });
    }
    let successes = tally.successes();
    if successes == 0 {
        return Err(Error::NoSuccessfulTrials {
            trials: tally.trials,
        });
    }
    let m = tally.trials as f64;
    let frequencies: Vec<f64> = tally.counts.iter().map(|c| c[0] as f64 / m).collect();
    // Σ𝓕ω/Σω, evaluated on the integer counts.
    let n = successes as f64;
    let mean = branch_values
        .iter()
        .zip(&tally.counts)
        .map(|(f, c)| f * c[0] as f64)
        .sum::<f64>()
        / n;
    let second = branch_values
        .iter()
        .zip(&tally.counts)
        .map(|(f, c)| (f - mean) * (f - mean) * c[0] as f64)
        .sum::<f64>()
        / n;
    Ok(EstimatorResult {
        frequencies,
        conditional_mean_estimate: mean,
        std_error: (second / n).sqrt(),
        successes,
        exact_probabilities: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::LinearOperator;
    use crate::measurement::strong_statistics;
    use crate::pathways::{branches_for, enumerate_paths};
    use crate::scenario::{builtin, random_scenario};
    use approx::assert_abs_diff_eq;

    fn setup(name: &str, functional: &str) -> (ScenarioSpec, PathwaySet, BranchDecomposition) {
        let spec = builtin(name).unwrap();
        let paths = enumerate_paths(&spec).unwrap();
        let def = spec
            .functional(functional)
            .or_else(|_| spec.meter(functional).map(|(_, d)| d))
            .unwrap()
            .clone();
        let (_, b) = branches_for(&spec, &paths, &def).unwrap();
        (spec, paths, b)
    }

    fn assert_cells(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert_abs_diff_eq!(*g, *w, epsilon = 1e-14);
        }
    }

    #[test]
    fn hadamard_joint_law() {
        let (spec, paths, b) = setup("hadamard_qubit", "sz");
        let d = trial_distribution(&spec, &paths, &b).unwrap();
        assert_cells(&d.branch_probabilities, &[0.5, 0.5]);
        assert_cells(&d.success, &[0.25, 0.25]);
        assert_cells(&d.failure, &[0.25, 0.25]);
    }

    #[test]
    fn deterministic_law() {
        let mut spec = builtin("hadamard_qubit").unwrap();
        spec.segments = vec![LinearOperator::identity(2), LinearOperator::identity(2)];
        let paths = enumerate_paths(&spec).unwrap();
        let (_, b) = branches_for(&spec, &paths, spec.functional("sz").unwrap()).unwrap();
        let d = trial_distribution(&spec, &paths, &b).unwrap();
        assert_eq!(d.cells().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 0.0]);
        let t = sample_trials(&d, 1000, 1, Partition::default()).unwrap();
        assert_eq!(t.counts, vec![[1000, 0], [0, 0]]);
    }

    #[test]
    fn three_path_union_law() {
        let (spec, paths, b) = setup("three_path", "O");
        let d = trial_distribution(&spec, &paths, &b).unwrap();
        assert_cells(&d.branch_probabilities, &[2.0 / 3.0, 1.0 / 3.0]);
        assert_cells(&d.success, &[0.0, 1.0 / 9.0]);
    }

    #[test]
    fn single_slice_branch_probability_matches_projector_norm() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let spec = random_scenario(&mut rng, 4, 1);
            let paths = enumerate_paths(&spec).unwrap();
            let (_, b) = branches_for(&spec, &paths, spec.functional("B@t0").unwrap()).unwrap();
            let d = trial_distribution(&spec, &paths, &b).unwrap();
            let evolved = spec.forward_state(0).unwrap();
            for (members, q) in b.branch_members.iter().zip(&d.branch_probabilities) {
                // ‖Π_k U_0 ψ_I‖² with Π_k the projector onto the member basis vectors
                let want: f64 = members
                    .iter()
                    .map(|&i| {
                        crate::hilbert::inner_product(&spec.slices[0].basis[i], &evolved)
                            .unwrap()
                            .norm_sqr()
                    })
                    .sum();
                assert_abs_diff_eq!(*q, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn multi_slice_laws_normalize() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let spec = random_scenario(&mut rng, 3, 3);
            let paths = enumerate_paths(&spec).unwrap();
            let (_, b) = branches_for(&spec, &paths, spec.functional("B@t1").unwrap()).unwrap();
            let d = trial_distribution(&spec, &paths, &b).unwrap();
            assert_abs_diff_eq!(d.cells().sum::<f64>(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sampling_is_reproducible_and_conserves_trials() {
        let d = TrialDistribution::from_cells(vec![0.25, 0.25], vec![0.25, 0.25]).unwrap();
        let a = sample_trials(&d, 10_000, 42, Partition { workers: 3 }).unwrap();
        let b = sample_trials(&d, 10_000, 42, Partition { workers: 3 }).unwrap();
        assert_eq!(a, b);
        let total: u64 = a.counts.iter().flatten().sum();
        assert_eq!(total, 10_000);
        assert_eq!(a.trials, 10_000);
        let c = sample_trials(&d, 10_000, 43, Partition { workers: 3 }).unwrap();
        assert_ne!(a.counts, c.counts);
        assert!(sample_trials(&d, 0, 1, Partition::default()).is_err());
        assert!(sample_trials(&d, 10, 1, Partition { workers: 0 }).is_err());
    }

    #[test]
    fn merge_is_commutative() {
        let d = TrialDistribution::from_cells(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        let a = sample_trials(&d, 500, 1, Partition::default()).unwrap();
        let b = sample_trials(&d, 700, 2, Partition::default()).unwrap();
        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        assert_eq!(ab.counts, ba.counts);
        assert_eq!(ab.trials, 1200);
    }

    #[test]
    fn estimator_on_concentrated_tally() {
        let t = TrialTally {
            trials: 10,
            counts: vec![[0, 3], [7, 0]],
            seed: 0,
            partition: Partition::default(),
        };
        let e = estimate(&t, &[5.0, -1.5]).unwrap();
        assert_eq!(e.conditional_mean_estimate, -1.5);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.frequencies, vec![0.0, 0.7]);

        let none = TrialTally {
            trials: 4,
            counts: vec![[0, 4]],
            seed: 0,
            partition: Partition::default(),
        };
        assert!(matches!(
            estimate(&none, &[1.0]),
            Err(Error::NoSuccessfulTrials { trials: 4 })
        ));
        assert!(estimate(&t, &[1.0]).is_err());
    }

    #[test]
    fn two_time_estimate_converges() {
        let (spec, paths, b) = setup("two_time_qubit", "diff");
        let d = trial_distribution(&spec, &paths, &b).unwrap();
        let t = sample_trials(&d, 1_000_000, 7, Partition { workers: 4 }).unwrap();
        let e = estimate(&t, &b.branch_values).unwrap().with_exact(&d);
        let exact = strong_statistics(&b).unwrap().conditional_mean;
        assert!((e.conditional_mean_estimate - exact).abs() <= 5.0 * e.std_error);
        assert_eq!(e.exact_probabilities.as_deref(), Some(&d.success[..]));
    }

    #[test]
    fn frequencies_concentrate_across_seeds() {
        let (spec, paths, b) = setup("hadamard_qubit", "sz");
        let d = trial_distribution(&spec, &paths, &b).unwrap();
        let m = 10_000u64;
        let mut within = 0;
        let mut total = 0;
        for seed in 0..100 {
            let t = sample_trials(&d, m, seed, Partition::default()).unwrap();
            let e = estimate(&t, &b.branch_values).unwrap();
            for (w, p) in e.frequencies.iter().zip(&d.success) {
                total += 1;
                if (w - p).abs() <= 5.0 * (p * (1.0 - p) / m as f64).sqrt() {
                    within += 1;
                }
            }
        }
        assert!(within as f64 >= 0.99 * total as f64);
    }
}
