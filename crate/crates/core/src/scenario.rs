//! Scenario definitions: the JSON document format, its validator and the
//! built-in library of interferometer-style examples.
//!
//! A scenario fixes the boundary states `|ψ_I⟩`, `|ψ_F⟩`, one unitary per
//! segment between consecutive time slices, and an orthonormal basis at each
//! intermediate slice. With `L` slices there are `L + 1` segments:
//!
//! ```text
//! ψ_I --U_0--> slice 1 --U_1--> ... slice L --U_L--> ψ_F
//! ```
//!
//! Complex numbers are written as `[re, im]` pairs and matrices as row-major
//! nested arrays.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hilbert::{
    self, apply, completeness_defect, eigendecompose_with, orthonormality_defect, LinearOperator,
    StateVector, Tolerances, UnitaryOperator, C64, MAX_DIM,
};
use crate::pathways::{FunctionalDef, MAX_PATHS};

/// Maximum number of intermediate time slices.
pub const MAX_SLICES: usize = 6;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 5] = [
    "three_path",
    "nested_loop",
    "blocked_arm",
    "two_time_qubit",
    "hadamard_qubit",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SliceBasis {
    pub label: String,
    pub basis: Vec<StateVector>,
}

impl SliceBasis {
    pub fn computational(label: &str, dim: usize) -> Self {
        Self {
            label: label.to_string(),
            basis: (0..dim).map(|i| StateVector::basis(dim, i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

/// A full problem statement. Fields are plain data; [`validate`] checks the
/// invariants and [`parse_scenario`] only ever returns validated specs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub dim: usize,
    pub psi_initial: StateVector,
    pub psi_final: StateVector,
    pub segments: Vec<LinearOperator>,
    pub slices: Vec<SliceBasis>,
    pub observables: BTreeMap<String, LinearOperator>,
    pub functionals: BTreeMap<String, FunctionalDef>,
    /// Meter label (e.g. `O`, `E'`) to functional name.
    pub meters: BTreeMap<String, String>,
    pub tolerances: Tolerances,
}

impl ScenarioSpec {
    pub fn slice_index(&self, label: &str) -> Result<usize> {
        self.slices
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownName {
                kind: "slice",
                name: label.to_string(),
            })
    }

    pub fn observable(&self, name: &str) -> Result<&LinearOperator> {
        self.observables
            .get(name)
            .ok_or_else(|| Error::UnknownName {
                kind: "observable",
                name: name.to_string(),
            })
    }

    pub fn functional(&self, name: &str) -> Result<&FunctionalDef> {
        self.functionals
            .get(name)
            .ok_or_else(|| Error::UnknownName {
                kind: "functional",
                name: name.to_string(),
            })
    }

    /// Resolve a meter label to the functional it is bound to.
    pub fn meter(&self, label: &str) -> Result<(&str, &FunctionalDef)> {
        let name = self.meters.get(label).ok_or_else(|| Error::UnknownName {
            kind: "meter",
            name: label.to_string(),
        })?;
        Ok((name.as_str(), self.functional(name)?))
    }

    /// Number of virtual paths, `Π` of slice sizes.
    pub fn path_count(&self) -> u128 {
        self.slices.iter().map(|s| s.len() as u128).product()
    }

    /// `|ψ(t)⟩ = U_{slice}…U_0 |ψ_I⟩`, the initial state evolved up to the
    /// given slice.
    pub fn forward_state(&self, slice: usize) -> Result<StateVector> {
        let mut psi = self.psi_initial.clone();
        for seg in &self.segments[..=slice] {
            psi = apply(seg, &psi)?;
        }
        Ok(psi)
    }

    /// `|φ(t)⟩ = (U_L…U_{slice+1})† |ψ_F⟩`, the final state evolved back to
    /// the given slice.
    pub fn backward_state(&self, slice: usize) -> Result<StateVector> {
        let mut phi = self.psi_final.clone();
        for seg in self.segments[slice + 1..].iter().rev() {
            phi = apply(&seg.adjoint(), &phi)?;
        }
        Ok(phi)
    }

    /// `⟨ψ_F|U_L…U_0|ψ_I⟩`, computed without inserting any slice basis.
    pub fn transition_amplitude(&self) -> Result<C64> {
        let mut psi = self.psi_initial.clone();
        for seg in &self.segments {
            psi = apply(seg, &psi)?;
        }
        hilbert::inner_product(&self.psi_final, &psi)
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn digest(&self) -> String {
        let doc = serde_json::to_vec(&ScenarioDocument::from(self)).expect("serializable");
        Sha256::digest(&doc)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Machine-readable diagnostic classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    Syntax,
    Shape,
    DimensionMismatch,
    DimensionCap,
    SliceCap,
    PathCap,
    SegmentCount,
    NonUnitary,
    NonOrthonormalBasis,
    IncompleteBasis,
    Unnormalized,
    NonHermitian,
    DuplicateLabel,
    UnknownSlice,
    UnknownObservable,
    IndexOutOfRange,
    TableLength,
    NotEigenbasis,
    DanglingMeter,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Syntax => "syntax",
            Self::Shape => "shape",
            Self::DimensionMismatch => "dimension_mismatch",
            Self::DimensionCap => "dimension_cap",
            Self::SliceCap => "slice_cap",
            Self::PathCap => "path_cap",
            Self::SegmentCount => "segment_count",
            Self::NonUnitary => "non_unitary",
            Self::NonOrthonormalBasis => "non_orthonormal_basis",
            Self::IncompleteBasis => "incomplete_basis",
            Self::Unnormalized => "unnormalized",
            Self::NonHermitian => "non_hermitian",
            Self::DuplicateLabel => "duplicate_label",
            Self::UnknownSlice => "unknown_slice",
            Self::UnknownObservable => "unknown_observable",
            Self::IndexOutOfRange => "index_out_of_range",
            Self::TableLength => "table_length",
            Self::NotEigenbasis => "not_eigenbasis",
            Self::DanglingMeter => "dangling_meter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    /// JSON path of the offending field, e.g. `segments[1]`.
    pub field: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl Diagnostic {
    fn new(code: DiagnosticCode, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            field: field.into(),
            message: message.into(),
            line: None,
            column: None,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.code.as_str())?;
        if let (Some(line), Some(col)) = (self.line, self.column) {
            write!(f, "line {line}, column {col}: ")?;
        }
        if !self.field.is_empty() {
            write!(f, "{}: ", self.field)?;
        }
        write!(f, "{}", self.message)
    }
}

/// Check every invariant of a scenario. An empty list means the scenario is valid.
pub fn validate(spec: &ScenarioSpec) -> Vec<Diagnostic> {
    use DiagnosticCode as D;
    let tol = &spec.tolerances;
    let mut out = Vec::new();
    let dim = spec.dim;

    if dim == 0 || dim > MAX_DIM {
        out.push(Diagnostic::new(
            D::DimensionCap,
            "dim",
            format!("dimension {dim} outside 1..={MAX_DIM}"),
        ));
        return out;
    }

    for (field, psi) in [
        ("psi_initial", &spec.psi_initial),
        ("psi_final", &spec.psi_final),
    ] {
        if psi.dim() != dim {
            out.push(Diagnostic::new(
                D::DimensionMismatch,
                field,
                format!("length {} but dim is {dim}", psi.dim()),
            ));
        } else if !psi.is_normalized(tol.normalization) {
            out.push(Diagnostic::new(
                D::Unnormalized,
                field,
                format!(
                    "norm² = {} differs from 1 by more than {:e}",
                    psi.norm_sqr(),
                    tol.normalization
                ),
            ));
        }
    }

    if spec.slices.len() > MAX_SLICES {
        out.push(Diagnostic::new(
            D::SliceCap,
            "slices",
            format!(
                "{} slices exceed the cap of {MAX_SLICES}",
                spec.slices.len()
            ),
        ));
    }
    if spec.segments.len() != spec.slices.len() + 1 {
        out.push(Diagnostic::new(
            D::SegmentCount,
            "segments",
            format!(
                "{} segments for {} slices; expected {}",
                spec.segments.len(),
                spec.slices.len(),
                spec.slices.len() + 1
            ),
        ));
    }

    for (i, seg) in spec.segments.iter().enumerate() {
        let field = format!("segments[{i}]");
        if seg.dim() != dim {
            out.push(Diagnostic::new(
                D::DimensionMismatch,
                field,
                format!("{0}x{0} matrix but dim is {dim}", seg.dim()),
            ));
            continue;
        }
        let defect = seg.unitarity_defect();
        if !(defect <= tol.unitarity) {
            out.push(Diagnostic::new(
                D::NonUnitary,
                field,
                format!("segment {i} is not unitary: max |U†U - I| = {defect:e}"),
            ));
        }
    }

    let mut labels = BTreeSet::new();
    for (i, slice) in spec.slices.iter().enumerate() {
        let field = format!("slices[{i}]");
        if !labels.insert(slice.label.as_str()) {
            out.push(Diagnostic::new(
                D::DuplicateLabel,
                format!("{field}.label"),
                format!("duplicate slice label `{}`", slice.label),
            ));
        }
        if let Some(bad) = slice.basis.iter().find(|v| v.dim() != dim) {
            out.push(Diagnostic::new(
                D::DimensionMismatch,
                format!("{field}.basis"),
                format!("basis vector of length {} but dim is {dim}", bad.dim()),
            ));
            continue;
        }
        let ortho = orthonormality_defect(&slice.basis).unwrap_or(f64::INFINITY);
        if !(ortho <= tol.orthonormality) {
            out.push(Diagnostic::new(
                D::NonOrthonormalBasis,
                format!("{field}.basis"),
                format!(
                    "basis `{}` is not orthonormal (defect {ortho:e})",
                    slice.label
                ),
            ));
        }
        let complete = completeness_defect(&slice.basis, dim).unwrap_or(f64::INFINITY);
        if slice.basis.len() != dim || !(complete <= tol.completeness) {
            out.push(Diagnostic::new(
                D::IncompleteBasis,
                format!("{field}.basis"),
                format!(
                    "basis `{}` has {} vectors and completeness defect {complete:e}; a resolution of identity needs {dim}",
                    slice.label,
                    slice.basis.len()
                ),
            ));
        }
    }

    let count = spec.path_count();
    if count > MAX_PATHS as u128 {
        out.push(Diagnostic::new(
            D::PathCap,
            "slices",
            format!("{count} virtual paths exceed the cap of {MAX_PATHS}"),
        ));
    }

    for (name, op) in &spec.observables {
        let field = format!("observables.{name}");
        if op.dim() != dim {
            out.push(Diagnostic::new(
                D::DimensionMismatch,
                field,
                format!("{0}x{0} matrix but dim is {dim}", op.dim()),
            ));
        } else if op.hermiticity_defect() > tol.hermiticity {
            out.push(Diagnostic::new(
                D::NonHermitian,
                field,
                format!("observable `{name}` is not hermitian"),
            ));
        }
    }

    // Reference checks need a structurally sound scenario.
    if out.is_empty() {
        for (name, def) in &spec.functionals {
            check_functional(spec, name, def, count as usize, &mut out);
        }
    }

    for (label, target) in &spec.meters {
        if !spec.functionals.contains_key(target) {
            out.push(Diagnostic::new(
                D::DanglingMeter,
                format!("meters.{label}"),
                format!("meter `{label}` references undefined functional `{target}`"),
            ));
        }
    }
    out
}

fn check_functional(
    spec: &ScenarioSpec,
    name: &str,
    def: &FunctionalDef,
    path_count: usize,
    out: &mut Vec<Diagnostic>,
) {
    use DiagnosticCode as D;
    let field = format!("functionals.{name}");
    let slice_known = |label: &str, out: &mut Vec<Diagnostic>| -> Option<usize> {
        let idx = spec.slices.iter().position(|s| s.label == label);
        if idx.is_none() {
            out.push(Diagnostic::new(
                D::UnknownSlice,
                field.clone(),
                format!("unknown slice `{label}`"),
            ));
        }
        idx
    };
    let eigenbasis_check = |slice: usize, observable: &str, out: &mut Vec<Diagnostic>| {
        let Some(op) = spec.observables.get(observable) else {
            out.push(Diagnostic::new(
                D::UnknownObservable,
                field.clone(),
                format!("unknown observable `{observable}`"),
            ));
            return;
        };
        let Ok(obs) = eigendecompose_with(op, &spec.tolerances) else {
            return;
        };
        let slice = &spec.slices[slice];
        if slice.basis.iter().any(|b| {
            obs.eigenvalue_of(b, spec.tolerances.eigen_residual)
                .is_err()
        }) {
            out.push(Diagnostic::new(
                D::NotEigenbasis,
                field.clone(),
                format!(
                    "basis of slice `{}` does not diagonalize `{observable}`",
                    slice.label
                ),
            ));
        }
    };
    match def {
        FunctionalDef::Indicator { paths } => {
            if let Some(&bad) = paths.iter().find(|&&p| p >= path_count) {
                out.push(Diagnostic::new(
                    D::IndexOutOfRange,
                    field,
                    format!("path index {bad} out of range ({path_count} paths)"),
                ));
            }
        }
        FunctionalDef::Projector { slice, index } => {
            if let Some(s) = slice_known(slice, out) {
                let size = spec.slices[s].len();
                if *index >= size {
                    out.push(Diagnostic::new(
                        D::IndexOutOfRange,
                        field,
                        format!(
                            "basis index {index} out of range for slice `{slice}` of size {size}"
                        ),
                    ));
                }
            }
        }
        FunctionalDef::ObservableAt { slice, observable } => {
            if let Some(s) = slice_known(slice, out) {
                eigenbasis_check(s, observable, out);
            }
        }
        FunctionalDef::TwoTimeDifference {
            slice_a,
            slice_b,
            observable,
        } => {
            let a = slice_known(slice_a, out);
            let b = slice_known(slice_b, out);
            for s in [a, b].into_iter().flatten() {
                eigenbasis_check(s, observable, out);
            }
        }
        FunctionalDef::Table { values } => {
            if values.len() != path_count {
                out.push(Diagnostic::new(
                    D::TableLength,
                    field,
                    format!("{} values for {path_count} paths", values.len()),
                ));
            }
        }
    }
}

/// Wire form of a scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub name: String,
    pub dim: usize,
    pub psi_initial: Vec<C64>,
    pub psi_final: Vec<C64>,
    pub segments: Vec<Vec<Vec<C64>>>,
    pub slices: Vec<SliceDocument>,
    #[serde(default)]
    pub observables: BTreeMap<String, Vec<Vec<C64>>>,
    #[serde(default)]
    pub functionals: BTreeMap<String, FunctionalDef>,
    #[serde(default)]
    pub meters: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceDocument {
    pub label: String,
    pub basis: Vec<Vec<C64>>,
}

impl From<&ScenarioSpec> for ScenarioDocument {
    fn from(spec: &ScenarioSpec) -> Self {
        let matrix = |op: &LinearOperator| op.rows().map(<[C64]>::to_vec).collect();
        Self {
            name: spec.name.clone(),
            dim: spec.dim,
            psi_initial: spec.psi_initial.entries().to_vec(),
            psi_final: spec.psi_final.entries().to_vec(),
            segments: spec.segments.iter().map(matrix).collect(),
            slices: spec
                .slices
                .iter()
                .map(|s| SliceDocument {
                    label: s.label.clone(),
                    basis: s.basis.iter().map(|v| v.entries().to_vec()).collect(),
                })
                .collect(),
            observables: spec
                .observables
                .iter()
                .map(|(k, v)| (k.clone(), matrix(v)))
                .collect(),
            functionals: spec.functionals.clone(),
            meters: spec.meters.clone(),
        }
    }
}

impl ScenarioDocument {
    /// Shape conversion; semantic checks are left to [`validate`].
    pub fn into_spec(self) -> std::result::Result<ScenarioSpec, Vec<Diagnostic>> {
        use DiagnosticCode as D;
        let mut diags = Vec::new();
        let mut vector = |field: String, entries: Vec<C64>| match StateVector::new(entries) {
            Ok(v) => Some(v),
            Err(e) => {
                diags.push(Diagnostic::new(D::Shape, field, e.to_string()));
                None
            }
        };
        let psi_initial = vector("psi_initial".into(), self.psi_initial);
        let psi_final = vector("psi_final".into(), self.psi_final);
        let mut slices = Vec::new();
        for (i, s) in self.slices.into_iter().enumerate() {
            let basis: Vec<_> = s
                .basis
                .into_iter()
                .enumerate()
                .filter_map(|(j, v)| vector(format!("slices[{i}].basis[{j}]"), v))
                .collect();
            slices.push(SliceBasis {
                label: s.label,
                basis,
            });
        }
        let mut matrix = |field: String, rows: Vec<Vec<C64>>| match LinearOperator::from_rows(&rows)
        {
            Ok(m) => Some(m),
            Err(e) => {
                diags.push(Diagnostic::new(D::Shape, field, e.to_string()));
                None
            }
        };
        let segments: Vec<_> = self
            .segments
            .into_iter()
            .enumerate()
            .filter_map(|(i, m)| matrix(format!("segments[{i}]"), m))
            .collect();
        let observables: BTreeMap<_, _> = self
            .observables
            .into_iter()
            .filter_map(|(k, m)| matrix(format!("observables.{k}"), m).map(|m| (k, m)))
            .collect();
        match (psi_initial, psi_final) {
            (Some(psi_initial), Some(psi_final)) if diags.is_empty() => Ok(ScenarioSpec {
                name: self.name,
                dim: self.dim,
                psi_initial,
                psi_final,
                segments,
                slices,
                observables,
                functionals: self.functionals,
                meters: self.meters,
                tolerances: Tolerances::default(),
            }),
            _ => Err(diags),
        }
    }
}

/// Parse and validate a scenario document. Never panics on malformed input.
pub fn parse_scenario(text: &[u8]) -> std::result::Result<ScenarioSpec, Vec<Diagnostic>> {
    let doc: ScenarioDocument = serde_json::from_slice(text).map_err(|e| {
        vec![Diagnostic {
            code: DiagnosticCode::Syntax,
            field: String::new(),
            message: e.to_string(),
            line: Some(e.line()),
            column: Some(e.column()),
        }]
    })?;
    let spec = doc.into_spec()?;
    let diags = validate(&spec);
    if diags.is_empty() {
        Ok(spec)
    } else {
        Err(diags)
    }
}

/// Pretty-printed JSON document for a scenario.
pub fn serialize_scenario(spec: &ScenarioSpec) -> String {
    serde_json::to_string_pretty(&ScenarioDocument::from(spec)).expect("serializable")
}

fn real_matrix(rows: &[&[f64]]) -> LinearOperator {
    LinearOperator::from_real_rows(rows).expect("square literal")
}

fn sigma_z() -> LinearOperator {
    real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// Orthogonal matrix whose first column is `(1, 1, 1)/√3` (`signs = +`) or
/// `(1, -1, 1)/√3` (`signs = -`).
fn splitter_columns(alternating: bool) -> LinearOperator {
    let (a, b, c) = (
        3f64.sqrt().recip(),
        2f64.sqrt().recip(),
        6f64.sqrt().recip(),
    );
    if alternating {
        // columns (1,-1,1)/√3, (1,1,0)/√2, (1,-1,-2)/√6
        real_matrix(&[&[a, b, c], &[-a, b, -c], &[a, 0.0, -2.0 * c]])
    } else {
        // columns (1,1,1)/√3, (1,-1,0)/√2, (1,1,-2)/√6
        real_matrix(&[&[a, b, c], &[a, -b, c], &[a, 0.0, -2.0 * c]])
    }
}

fn three_arm_functionals(spec: &mut ScenarioSpec, union: Vec<usize>, union_after: Vec<usize>) {
    let f = &mut spec.functionals;
    f.insert("union_12".into(), FunctionalDef::Indicator { paths: union });
    f.insert(
        "union_12_after".into(),
        FunctionalDef::Indicator { paths: union_after },
    );
}

fn three_path() -> ScenarioSpec {
    let mut spec = ScenarioSpec {
        name: "three_path".into(),
        dim: 3,
        psi_initial: StateVector::basis(3, 0),
        psi_final: StateVector::basis(3, 0),
        // Entry amplitudes (1,-1,1)/√3, exit amplitudes (1,1,1)/√3.
        segments: vec![splitter_columns(true), splitter_columns(false).adjoint()],
        slices: vec![SliceBasis::computational("t", 3)],
        observables: BTreeMap::new(),
        functionals: BTreeMap::new(),
        meters: BTreeMap::new(),
        tolerances: Tolerances::default(),
    };
    three_arm_functionals(&mut spec, vec![0, 1], vec![0, 1]);
    for (i, name) in ["pi_1", "pi_2", "pi_3"].iter().enumerate() {
        spec.functionals.insert(
            (*name).into(),
            FunctionalDef::Projector {
                slice: "t".into(),
                index: i,
            },
        );
    }
    for (label, target) in [
        ("O", "union_12"),
        ("O'", "union_12_after"),
        ("E", "pi_1"),
        ("E'", "pi_1"),
    ] {
        spec.meters.insert(label.into(), target.into());
    }
    spec
}

fn nested_loop(blocked: bool) -> ScenarioSpec {
    // Slices `t_E` and `t_E'` both resolve the two loop arms and the outer arm.
    // Paths are labelled (entry arm, exit arm), index 3*i + j.
    let entry = if blocked {
        // All amplitude is routed into the outer arm.
        real_matrix(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]])
    } else {
        splitter_columns(false)
    };
    let mut spec = ScenarioSpec {
        name: if blocked {
            "blocked_arm"
        } else {
            "nested_loop"
        }
        .into(),
        dim: 3,
        psi_initial: StateVector::basis(3, 0),
        psi_final: StateVector::basis(3, 0),
        segments: vec![
            entry,
            LinearOperator::identity(3),
            splitter_columns(true).adjoint(),
        ],
        slices: vec![
            SliceBasis::computational("t_E", 3),
            SliceBasis::computational("t_E'", 3),
        ],
        observables: BTreeMap::new(),
        functionals: BTreeMap::new(),
        meters: BTreeMap::new(),
        tolerances: Tolerances::default(),
    };
    // O: loop entry arms at the first slice; O': loop exit arms at the second.
    let before: Vec<usize> = (0..9).filter(|p| p / 3 < 2).collect();
    let after: Vec<usize> = (0..9).filter(|p| p % 3 < 2).collect();
    three_arm_functionals(&mut spec, before, after);
    for (i, name) in ["pi_1", "pi_2", "pi_3"].iter().enumerate() {
        spec.functionals.insert(
            (*name).into(),
            FunctionalDef::Projector {
                slice: "t_E".into(),
                index: i,
            },
        );
        spec.functionals.insert(
            format!("{name}_after"),
            FunctionalDef::Projector {
                slice: "t_E'".into(),
                index: i,
            },
        );
    }
    for (label, target) in [
        ("O", "union_12"),
        ("O'", "union_12_after"),
        ("E", "pi_1"),
        ("E'", "pi_1_after"),
    ] {
        spec.meters.insert(label.into(), target.into());
    }
    spec
}

fn qubit_observables() -> (BTreeMap<String, LinearOperator>, SliceBasis) {
    let mut obs = BTreeMap::new();
    obs.insert("sz".to_string(), sigma_z());
    (obs, SliceBasis::computational("t", 2))
}

fn hadamard_qubit() -> ScenarioSpec {
    let (observables, slice) = qubit_observables();
    let h = UnitaryOperator::hadamard().into_operator();
    let mut functionals = BTreeMap::new();
    functionals.insert(
        "sz".into(),
        FunctionalDef::ObservableAt {
            slice: "t".into(),
            observable: "sz".into(),
        },
    );
    functionals.insert(
        "pi_0".into(),
        FunctionalDef::Projector {
            slice: "t".into(),
            index: 0,
        },
    );
    functionals.insert(
        "pi_1".into(),
        FunctionalDef::Projector {
            slice: "t".into(),
            index: 1,
        },
    );
    ScenarioSpec {
        name: "hadamard_qubit".into(),
        dim: 2,
        psi_initial: StateVector::basis(2, 0),
        psi_final: StateVector::basis(2, 0),
        segments: vec![h.clone(), h],
        slices: vec![slice],
        observables,
        functionals,
        meters: BTreeMap::new(),
        tolerances: Tolerances::default(),
    }
}

fn two_time_qubit() -> ScenarioSpec {
    let (observables, _) = qubit_observables();
    let h = UnitaryOperator::hadamard().into_operator();
    let mut functionals = BTreeMap::new();
    functionals.insert(
        "diff".into(),
        FunctionalDef::TwoTimeDifference {
            slice_a: "t'".into(),
            slice_b: "t''".into(),
            observable: "sz".into(),
        },
    );
    functionals.insert(
        "sz_first".into(),
        FunctionalDef::ObservableAt {
            slice: "t'".into(),
            observable: "sz".into(),
        },
    );
    functionals.insert(
        "sz_second".into(),
        FunctionalDef::ObservableAt {
            slice: "t''".into(),
            observable: "sz".into(),
        },
    );
    ScenarioSpec {
        name: "two_time_qubit".into(),
        dim: 2,
        psi_initial: StateVector::basis(2, 0),
        psi_final: StateVector::basis(2, 0),
        segments: vec![h.clone(), h, LinearOperator::identity(2)],
        slices: vec![
            SliceBasis::computational("t'", 2),
            SliceBasis::computational("t''", 2),
        ],
        observables,
        functionals,
        meters: BTreeMap::new(),
        tolerances: Tolerances::default(),
    }
}

/// Look up a built-in scenario by name (see [`BUILTIN_NAMES`]).
pub fn builtin(name: &str) -> Result<ScenarioSpec> {
    match name {
        "three_path" => Ok(three_path()),
        "nested_loop" => Ok(nested_loop(false)),
        "blocked_arm" => Ok(nested_loop(true)),
        "two_time_qubit" => Ok(two_time_qubit()),
        "hadamard_qubit" => Ok(hadamard_qubit()),
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

/// Haar-like random unitary: QR (via Gram-Schmidt) of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> LinearOperator {
    loop {
        let mut cols: Vec<Vec<C64>> = (0..dim)
            .map(|_| (0..dim).map(|_| gaussian_complex(rng)).collect())
            .collect();
        if hilbert::gram_schmidt(&mut cols).is_ok() {
            let entries = (0..dim)
                .flat_map(|r| cols.iter().map(move |c| c[r]))
                .collect();
            return LinearOperator::new(dim, entries).expect("square");
        }
    }
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v =
            StateVector::new((0..dim).map(|_| gaussian_complex(rng)).collect()).expect("finite");
        if let Ok(n) = v.normalized() {
            return n;
        }
    }
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random scenario with `slices` slices, each resolved in a random orthonormal
/// basis, and a random hermitian observable `B` diagonal in every slice basis
/// (functional `B@<label>` for each slice).
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R, dim: usize, slices: usize) -> ScenarioSpec {
    let mut spec = ScenarioSpec {
        name: format!("random_d{dim}_l{slices}"),
        dim,
        psi_initial: random_state(rng, dim),
        psi_final: random_state(rng, dim),
        segments: (0..=slices).map(|_| random_unitary(rng, dim)).collect(),
        slices: Vec::new(),
        observables: BTreeMap::new(),
        functionals: BTreeMap::new(),
        meters: BTreeMap::new(),
        tolerances: Tolerances::default(),
    };
    for l in 0..slices {
        let basis_op = random_unitary(rng, dim);
        let basis: Vec<StateVector> = (0..dim).map(|c| basis_op.column(c)).collect();
        let values: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let label = format!("t{l}");
        let name = format!("B@{label}");
        spec.observables.insert(
            name.clone(),
            LinearOperator::from_spectrum(&values, &basis).expect("same dims"),
        );
        spec.functionals.insert(
            name.clone(),
            FunctionalDef::ObservableAt {
                slice: label.clone(),
                observable: name,
            },
        );
        spec.slices.push(SliceBasis { label, basis });
    }
    spec
}
