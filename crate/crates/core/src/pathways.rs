//! Virtual paths, their chain-product amplitudes, functionals over paths and
//! coarse-graining into branches.
//!
//! A path picks one basis vector at every slice. Its amplitude is
//!
//! ```text
//! A(i_1..i_L) = ⟨ψ_F|U_L|b_{i_L}⟩ ⟨b_{i_L}|U_{L-1}|b_{i_{L-1}}⟩ ⋯ ⟨b_{i_1}|U_0|ψ_I⟩
//! ```
//!
//! and paths are listed lexicographically over `(i_1, …, i_L)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{apply, eigendecompose_with, inner_product, StateVector, C64, ZERO};
use crate::scenario::{validate, ScenarioSpec};

/// Largest number of virtual paths [`enumerate_paths`] will produce.
pub const MAX_PATHS: usize = 1_000_000;

/// Serializable description of a path functional, as it appears in scenario
/// documents. Path indices are zero-based positions in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalDef {
    Indicator {
        paths: Vec<usize>,
    },
    Projector {
        slice: String,
        index: usize,
    },
    ObservableAt {
        slice: String,
        observable: String,
    },
    TwoTimeDifference {
        slice_a: String,
        slice_b: String,
        observable: String,
    },
    Table {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    IndicatorSubset,
    ObservableAtTime,
    TwoTimeDifference,
    CustomTable,
}

/// A real value `𝓕_i` on every path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathFunctional {
    pub kind: FunctionalKind,
    pub values: Vec<f64>,
}

impl PathFunctional {
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("functional table"));
        }
        Ok(Self {
            kind: FunctionalKind::CustomTable,
            values,
        })
    }

    pub fn constant(value: f64, paths: &PathwaySet) -> Self {
        Self {
            kind: FunctionalKind::CustomTable,
            values: vec![value; paths.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathwaySet {
    slice_labels: Vec<String>,
    slice_sizes: Vec<usize>,
    /// Flattened basis indices, `slice_sizes.len()` per path.
    indices: Vec<usize>,
    amplitudes: Vec<C64>,
    /// Chain products without the final `⟨ψ_F|U_L|b⟩` factor.
    prefinal: Vec<C64>,
    scenario_digest: String,
}

impl PathwaySet {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Basis index at every slice for path `i`.
    pub fn path(&self, i: usize) -> &[usize] {
        let l = self.slice_sizes.len();
        &self.indices[i * l..(i + 1) * l]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[usize]> {
        (0..self.len()).map(|i| self.path(i))
    }

    pub fn slice_labels(&self) -> &[String] {
        &self.slice_labels
    }

    pub fn slice_sizes(&self) -> &[usize] {
        &self.slice_sizes
    }

    pub fn scenario_digest(&self) -> &str {
        &self.scenario_digest
    }

    /// `Σ_i A_i`.
    pub fn amplitude_sum(&self) -> C64 {
        self.amplitudes.iter().sum()
    }

    pub(crate) fn prefinal(&self) -> &[C64] {
        &self.prefinal
    }

    /// Slice labels and sizes must match the scenario the caller pairs it with.
    pub(crate) fn check_structure(&self, scenario: &ScenarioSpec) -> Result<()> {
        let same = scenario.slices.len() == self.slice_labels.len()
            && scenario
                .slices
                .iter()
                .zip(self.slice_labels.iter().zip(&self.slice_sizes))
                .all(|(s, (label, &size))| s.label == *label && s.len() == size);
        if !same {
            return Err(Error::FunctionalMismatch(
                "path set was enumerated from a different scenario".into(),
            ));
        }
        Ok(())
    }

    fn slice_position(&self, label: &str) -> Result<usize> {
        self.slice_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownName {
                kind: "slice",
                name: label.to_string(),
            })
    }
}

/// Enumerate every virtual path of a validated scenario with its amplitude.
pub fn enumerate_paths(scenario: &ScenarioSpec) -> Result<PathwaySet> {
    let count = scenario.path_count();
    if count > MAX_PATHS as u128 {
        return Err(Error::PathCapExceeded {
            count,
            cap: MAX_PATHS,
        });
    }
    let diags = validate(scenario);
    if !diags.is_empty() {
        return Err(Error::InvalidScenario(diags));
    }
    let count = count as usize;
    let slices = &scenario.slices;
    let n_slices = slices.len();

    // Transfer tables: first[i] = ⟨b¹_i|U_0|ψ_I⟩,
    // hop[l][j][i] = ⟨b^{l+1}_j|U_l|b^l_i⟩, last[j] = ⟨ψ_F|U_L|b^L_j⟩.
    let amplitudes;
    let prefinal;
    let mut indices = Vec::with_capacity(count * n_slices);
    if n_slices == 0 {
        let amp = scenario.transition_amplitude()?;
        amplitudes = vec![amp];
        prefinal = vec![C64::new(1.0, 0.0)];
    } else {
        let u0_psi = apply(&scenario.segments[0], &scenario.psi_initial)?;
        let first: Vec<C64> = slices[0]
            .basis
            .iter()
            .map(|b| inner_product(b, &u0_psi))
            .collect::<Result<_>>()?;
        let mut hops: Vec<Vec<Vec<C64>>> = Vec::with_capacity(n_slices - 1);
        for l in 1..n_slices {
            let seg = &scenario.segments[l];
            let mut table = Vec::with_capacity(slices[l].len());
            let moved: Vec<StateVector> = slices[l - 1]
                .basis
                .iter()
                .map(|b| apply(seg, b))
                .collect::<Result<_>>()?;
            for bj in &slices[l].basis {
                table.push(
                    moved
                        .iter()
                        .map(|m| inner_product(bj, m))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            hops.push(table);
        }
        let last_seg = &scenario.segments[n_slices];
        let last: Vec<C64> = slices[n_slices - 1]
            .basis
            .iter()
            .map(|b| inner_product(&scenario.psi_final, &apply(last_seg, b)?))
            .collect::<Result<_>>()?;

        let sizes: Vec<usize> = slices.iter().map(|s| s.len()).collect();
        let mut amps = Vec::with_capacity(count);
        let mut pre = Vec::with_capacity(count);
        let mut odometer = vec![0usize; n_slices];
        for _ in 0..count {
            let mut chain = first[odometer[0]];
            for l in 1..n_slices {
                chain *= hops[l - 1][odometer[l]][odometer[l - 1]];
            }
            pre.push(chain);
            amps.push(last[odometer[n_slices - 1]] * chain);
            indices.extend_from_slice(&odometer);
            // Advance the rightmost index first (lexicographic order).
            for l in (0..n_slices).rev() {
                odometer[l] += 1;
                if odometer[l] < sizes[l] {
                    break;
                }
                odometer[l] = 0;
            }
        }
        amplitudes = amps;
        prefinal = pre;
    }

    Ok(PathwaySet {
        slice_labels: slices.iter().map(|s| s.label.clone()).collect(),
        slice_sizes: slices.iter().map(|s| s.len()).collect(),
        indices,
        amplitudes,
        prefinal,
        scenario_digest: scenario.digest(),
    })
}

/// Evaluate a functional definition on every path of `paths`.
pub fn evaluate_functional(
    def: &FunctionalDef,
    scenario: &ScenarioSpec,
    paths: &PathwaySet,
) -> Result<PathFunctional> {
    paths.check_structure(scenario)?;
    match def {
        FunctionalDef::Indicator { paths: subset } => indicator_functional(subset, paths),
        FunctionalDef::Projector { slice, index } => projector_functional(paths, slice, *index),
        FunctionalDef::ObservableAt { slice, observable } => {
            let values = slice_eigenvalues(scenario, slice, observable)?;
            let pos = paths.slice_position(slice)?;
            Ok(PathFunctional {
                kind: FunctionalKind::ObservableAtTime,
                values: paths.paths().map(|p| values[p[pos]]).collect(),
            })
        }
        FunctionalDef::TwoTimeDifference {
            slice_a,
            slice_b,
            observable,
        } => {
            let va = slice_eigenvalues(scenario, slice_a, observable)?;
            let vb = slice_eigenvalues(scenario, slice_b, observable)?;
            let pa = paths.slice_position(slice_a)?;
            let pb = paths.slice_position(slice_b)?;
            Ok(PathFunctional {
                kind: FunctionalKind::TwoTimeDifference,
                values: paths.paths().map(|p| vb[p[pb]] - va[p[pa]]).collect(),
            })
        }
        FunctionalDef::Table { values } => {
            if values.len() != paths.len() {
                return Err(Error::FunctionalMismatch(format!(
                    "table has {} values for {} paths",
                    values.len(),
                    paths.len()
                )));
            }
            PathFunctional::table(values.clone())
        }
    }
}

/// Eigenvalue of `observable` on each basis vector of `slice`.
fn slice_eigenvalues(scenario: &ScenarioSpec, slice: &str, observable: &str) -> Result<Vec<f64>> {
    let tol = &scenario.tolerances;
    let obs = eigendecompose_with(scenario.observable(observable)?, tol)?;
    let basis = &scenario.slices[scenario.slice_index(slice)?].basis;
    basis
        .iter()
        .map(|b| obs.eigenvalue_of(b, tol.eigen_residual))
        .collect()
}

/// 1 on the listed paths, 0 elsewhere.
pub fn indicator_functional(subset: &[usize], paths: &PathwaySet) -> Result<PathFunctional> {
    let mut values = vec![0.0; paths.len()];
    for &i in subset {
        *values.get_mut(i).ok_or(Error::IndexOutOfRange {
            index: i,
            size: paths.len(),
        })? = 1.0;
    }
    Ok(PathFunctional {
        kind: FunctionalKind::IndicatorSubset,
        values,
    })
}

/// Indicator of every path passing through basis vector `index` at `slice`,
/// i.e. the functional of `Π = |b_index⟩⟨b_index|` at that time.
pub fn projector_functional(
    paths: &PathwaySet,
    slice: &str,
    index: usize,
) -> Result<PathFunctional> {
    let pos = paths.slice_position(slice)?;
    let size = paths.slice_sizes()[pos];
    if index >= size {
        return Err(Error::IndexOutOfRange { index, size });
    }
    Ok(PathFunctional {
        kind: FunctionalKind::IndicatorSubset,
        values: paths
            .paths()
            .map(|p| if p[pos] == index { 1.0 } else { 0.0 })
            .collect(),
    })
}

/// Paths grouped by (approximately) equal functional value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchDecomposition {
    /// Distinct values `𝓕_k`, descending.
    pub branch_values: Vec<f64>,
    /// `Ã_k = Σ_{i ∈ k} A_i`.
    pub branch_amplitudes: Vec<C64>,
    /// Path indices in each branch, ascending.
    pub branch_members: Vec<Vec<usize>>,
}

impl BranchDecomposition {
    /// Build directly from branch values and amplitudes (one member per branch).
    pub fn from_branches(values: Vec<f64>, amplitudes: Vec<C64>) -> Result<Self> {
        if values.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: amplitudes.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) || amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("branch decomposition"));
        }
        let members = (0..values.len()).map(|k| vec![k]).collect();
        Ok(Self {
            branch_values: values,
            branch_amplitudes: amplitudes,
            branch_members: members,
        })
    }

    pub fn len(&self) -> usize {
        self.branch_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branch_values.is_empty()
    }

    /// `Σ_k Ã_k`.
    pub fn amplitude_sum(&self) -> C64 {
        self.branch_amplitudes.iter().sum()
    }
}

/// Group paths whose functional values lie within `tol` of a neighbour
/// (single linkage) and sum their amplitudes. Each branch is labelled with the
/// mean value of its members.
pub fn coarse_grain(
    paths: &PathwaySet,
    f: &PathFunctional,
    tol: f64,
) -> Result<BranchDecomposition> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "clustering tolerance {tol} must be >= 0"
        )));
    }
    if f.values.len() != paths.len() {
        return Err(Error::FunctionalMismatch(format!(
            "functional has {} values for {} paths",
            f.values.len(),
            paths.len()
        )));
    }
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| f.values[b].total_cmp(&f.values[a]).then(a.cmp(&b)));

    let mut branch_values = Vec::new();
    let mut branch_amplitudes = Vec::new();
    let mut branch_members = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && f.values[order[end - 1]] - f.values[order[end]] <= tol {
            end += 1;
        }
        let mut members = order[start..end].to_vec();
        members.sort_unstable();
        let anchor = f.values[members[0]];
        let mean = anchor
            + members.iter().map(|&i| f.values[i] - anchor).sum::<f64>() / members.len() as f64;
        let amp = members
            .iter()
            .fold(ZERO, |acc, &i| acc + paths.amplitudes[i]);
        branch_values.push(mean);
        branch_amplitudes.push(amp);
        branch_members.push(members);
        start = end;
    }
    Ok(BranchDecomposition {
        branch_values,
        branch_amplitudes,
        branch_members,
    })
}

/// Default clustering tolerance for [`coarse_grain`].
pub const DEFAULT_GRAIN_TOL: f64 = 1e-9;

/// Enumerate, evaluate a named functional (or meter label) and coarse-grain.
pub fn branches_for(
    scenario: &ScenarioSpec,
    paths: &PathwaySet,
    def: &FunctionalDef,
) -> Result<(PathFunctional, BranchDecomposition)> {
    let f = evaluate_functional(def, scenario, paths)?;
    let b = coarse_grain(paths, &f, DEFAULT_GRAIN_TOL)?;
    Ok((f, b))
}
