//! Strong and weak measurement statistics over a branch decomposition.
//!
//! A strong meter turns each branch into an exclusive outcome with probability
//! `P_k = |Ã_k|²`; its post-selected mean is `Σ 𝓕_k P_k / Σ P_j`. A weak meter
//! leaves interference intact and reads out the relative amplitudes
//! `α̃_k = Ã_k / Σ_j Ã_j` through `Σ 𝓕_k α̃_k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{inner_product, LinearOperator, C64};
use crate::pathways::{BranchDecomposition, PathwaySet};
use crate::scenario::ScenarioSpec;

/// Squared magnitudes at or below this count as zero post-selection.
pub const POSTSELECTION_FLOOR: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongResult {
    pub branch_values: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub conditional_mean: f64,
    pub postselect_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakResult {
    pub relative_amplitudes: Vec<C64>,
    pub weak_value: C64,
    pub real_shift: f64,
    pub imag_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumRuleReport {
    pub weighted_sum: C64,
    /// `Σ |𝓕_k X_k|`, the scale the null test is relative to.
    pub scale: f64,
    pub is_null: bool,
    pub tol: f64,
}

impl SumRuleReport {
    fn new(weighted_sum: C64, scale: f64, tol: f64) -> Self {
        Self {
            weighted_sum,
            scale,
            is_null: weighted_sum.norm() <= tol * scale.max(1.0),
            tol,
        }
    }
}

/// Probabilities and post-selected mean for an accurate meter.
pub fn strong_statistics(branches: &BranchDecomposition) -> Result<StrongResult> {
    let probabilities: Vec<f64> = branches
        .branch_amplitudes
        .iter()
        .map(|a| a.norm_sqr())
        .collect();
    let postselect_prob: f64 = probabilities.iter().sum();
    if postselect_prob <= POSTSELECTION_FLOOR {
        return Err(Error::UndefinedConditionalMean);
    }
    let weighted: f64 = branches
        .branch_values
        .iter()
        .zip(&probabilities)
        .map(|(f, p)| f * p)
        .sum();
    Ok(StrongResult {
        branch_values: branches.branch_values.clone(),
        probabilities,
        conditional_mean: weighted / postselect_prob,
        postselect_prob,
    })
}

/// Relative amplitudes and the weak value `Σ 𝓕_k α̃_k`.
pub fn weak_statistics(branches: &BranchDecomposition) -> Result<WeakResult> {
    let total = branches.amplitude_sum();
    if total.norm_sqr() <= POSTSELECTION_FLOOR {
        return Err(Error::VanishingTransitionAmplitude);
    }
    let relative_amplitudes: Vec<C64> = branches
        .branch_amplitudes
        .iter()
        .map(|a| a / total)
        .collect();
    let weak_value: C64 = branches
        .branch_values
        .iter()
        .zip(&relative_amplitudes)
        .map(|(f, a)| a * f)
        .sum();
    Ok(WeakResult {
        relative_amplitudes,
        weak_value,
        real_shift: weak_value.re,
        imag_shift: weak_value.im,
    })
}

/// Amplitude sum rule `Σ 𝓕_k Ã_k`; null exactly when the weak value vanishes.
pub fn check_sum_rule(branches: &BranchDecomposition, tol: f64) -> SumRuleReport {
    let terms = branches
        .branch_values
        .iter()
        .zip(&branches.branch_amplitudes)
        .map(|(f, a)| a * f);
    let (sum, scale) = terms.fold((C64::new(0.0, 0.0), 0.0), |(s, m), t| (s + t, m + t.norm()));
    SumRuleReport::new(sum, scale, tol)
}

/// Probability sum rule `Σ 𝓕_k P_k`.
pub fn strong_sum_rule(result: &StrongResult, tol: f64) -> SumRuleReport {
    let (sum, scale) = result
        .branch_values
        .iter()
        .zip(&result.probabilities)
        .map(|(f, p)| f * p)
        .fold((0.0, 0.0), |(s, m), t| (s + t, m + t.abs()));
    SumRuleReport::new(C64::new(sum, 0.0), scale, tol)
}

/// Weak value of an operator at a slice, computed from evolved states rather
/// than from paths:
/// `⟨ψ_F(t)|B|ψ_I(t)⟩ / ⟨ψ_F(t)|ψ_I(t)⟩`.
pub fn operator_weak_value(
    scenario: &ScenarioSpec,
    slice: &str,
    op: &LinearOperator,
) -> Result<C64> {
    let l = scenario.slice_index(slice)?;
    let forward = scenario.forward_state(l)?;
    let backward = scenario.backward_state(l)?;
    let denominator = inner_product(&backward, &forward)?;
    if denominator.norm_sqr() <= POSTSELECTION_FLOOR {
        return Err(Error::VanishingTransitionAmplitude);
    }
    Ok(op.sandwich(&backward, &forward)? / denominator)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    /// `|A + δA|² - |A|²` per path.
    pub exact_dp: Vec<f64>,
    /// `2 Re[conj(A) δA]` per path.
    pub linear_dp: Vec<f64>,
    pub max_deviation: f64,
    /// `‖δA‖ / ‖A‖`.
    pub relative_size: f64,
    /// Set when the perturbation is above 10% of the amplitudes.
    pub large_perturbation: bool,
}

/// Compare exact probability changes with their first-order prediction.
pub fn perturbation_check(paths: &PathwaySet, delta: &[C64]) -> Result<PerturbationReport> {
    perturbation_check_amplitudes(paths.amplitudes(), delta)
}

pub fn perturbation_check_amplitudes(
    amplitudes: &[C64],
    delta: &[C64],
) -> Result<PerturbationReport> {
    if amplitudes.len() != delta.len() {
        return Err(Error::DimensionMismatch {
            left: amplitudes.len(),
            right: delta.len(),
        });
    }
    let exact_dp: Vec<f64> = amplitudes
        .iter()
        .zip(delta)
        .map(|(a, d)| (a + d).norm_sqr() - a.norm_sqr())
        .collect();
    let linear_dp: Vec<f64> = amplitudes
        .iter()
        .zip(delta)
        .map(|(a, d)| 2.0 * (a.conj() * d).re)
        .collect();
    let max_deviation = exact_dp
        .iter()
        .zip(&linear_dp)
        .map(|(e, l)| (e - l).abs())
        .fold(0.0, f64::max);
    let norm = |v: &[C64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let a_norm = norm(amplitudes);
    let relative_size = if a_norm > 0.0 {
        norm(delta) / a_norm
    } else {
        f64::INFINITY
    };
    Ok(PerturbationReport {
        exact_dp,
        linear_dp,
        max_deviation,
        relative_size,
        large_perturbation: relative_size > 0.1,
    })
}
