//! Finite-dimensional complex linear algebra: state vectors, square operators,
//! validated unitaries and eigendecomposed observables.
//!
//! Everything here is small and dense. Operators are stored row-major and all
//! types are immutable once built.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Largest Hilbert-space dimension accepted by scenario validation.
pub const MAX_DIM: usize = 64;

/// Absolute tolerances used by the validation checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `|norm² - 1|` for boundary states.
    pub normalization: f64,
    /// `max |U†U - I|` at construction.
    pub unitarity: f64,
    /// `max |U†U - I|` accepted after composing two unitaries.
    pub composed_unitarity: f64,
    /// `max |B - B†|`.
    pub hermiticity: f64,
    /// Orthonormality of basis vectors and eigenvectors.
    pub orthonormality: f64,
    /// `max |Σ|b⟩⟨b| - I|`.
    pub completeness: f64,
    /// Eigenvalues closer than this are treated as one degenerate level.
    pub degeneracy: f64,
    /// Residual `|B b - λ b|` and reconstruction error.
    pub eigen_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            normalization: 1e-9,
            unitarity: 1e-9,
            composed_unitarity: 1e-8,
            hermiticity: 1e-9,
            orthonormality: 1e-9,
            completeness: 1e-8,
            degeneracy: 1e-9,
            eigen_residual: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    entries: Vec<C64>,
}

impl StateVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDimension);
        }
        if entries.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(Self { entries })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut entries = vec![ZERO; dim];
        entries[index] = ONE;
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![ZERO; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            entries: self.entries.iter().map(|&c| c * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// True when `|norm² - 1| <= tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }
}

/// `⟨bra|ket⟩`, conjugate-linear in the first argument.
pub fn inner_product(bra: &StateVector, ket: &StateVector) -> Result<C64> {
    check_dims(bra.dim(), ket.dim())?;
    Ok(bra
        .entries
        .iter()
        .zip(&ket.entries)
        .map(|(b, k)| b.conj() * k)
        .sum())
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl LinearOperator {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if entries.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: entries.len() / dim,
                cols: dim,
            });
        }
        if entries.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::NotSquare {
                rows: dim,
                cols: bad.len(),
            });
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        check_dims(ket.dim(), bra.dim())?;
        let dim = ket.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for k in ket.entries() {
            for b in bra.entries() {
                entries.push(k * b.conj());
            }
        }
        Ok(Self { dim, entries })
    }

    /// `Σ_i λ_i |v_i⟩⟨v_i|`.
    pub fn from_spectrum(values: &[f64], vectors: &[StateVector]) -> Result<Self> {
        let dim = vectors
            .first()
            .map(StateVector::dim)
            .ok_or(Error::EmptyDimension)?;
        let mut out = Self::zeros(dim);
        for (&value, v) in values.iter().zip(vectors) {
            check_dims(dim, v.dim())?;
            for r in 0..dim {
                for c in 0..dim {
                    out.entries[r * dim + c] += v.entries[r] * v.entries[c].conj() * value;
                }
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.entries.chunks(self.dim)
    }

    pub fn column(&self, col: usize) -> StateVector {
        StateVector {
            entries: (0..self.dim).map(|r| self.get(r, col)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self { dim: d, entries }
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &LinearOperator) -> Result<Self> {
        check_dims(self.dim, rhs.dim)?;
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * rhs.entries[k * d + c];
                }
            }
        }
        Ok(Self { dim: d, entries })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &LinearOperator) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |U†U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let product = self
            .adjoint()
            .matmul(self)
            .expect("adjoint has the same dimension");
        product.max_abs_diff(&Self::identity(self.dim))
    }

    /// `max |B - B†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Expectation-style sandwich `⟨bra|self|ket⟩`.
    pub fn sandwich(&self, bra: &StateVector, ket: &StateVector) -> Result<C64> {
        inner_product(bra, &apply(self, ket)?)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

/// `op |state⟩`.
pub fn apply(op: &LinearOperator, state: &StateVector) -> Result<StateVector> {
    check_dims(op.dim(), state.dim())?;
    let entries = op
        .rows()
        .map(|row| {
            // Start from the first product so that `1·x + 0·y` reproduces `x`.
            let mut acc = row[0] * state.entries[0];
            for (a, x) in row.iter().zip(&state.entries).skip(1) {
                acc += a * x;
            }
            acc
        })
        .collect();
    Ok(StateVector { entries })
}

/// A linear operator with `max |U†U - I|` within tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitaryOperator(LinearOperator);

impl UnitaryOperator {
    pub fn new(op: LinearOperator) -> Result<Self> {
        Self::with_tolerance(op, Tolerances::default().unitarity)
    }

    pub fn with_tolerance(op: LinearOperator, tol: f64) -> Result<Self> {
        let defect = op.unitarity_defect();
        if !(defect <= tol) {
            return Err(Error::NotUnitary { defect, tol });
        }
        Ok(Self(op))
    }

    pub fn identity(dim: usize) -> Self {
        Self(LinearOperator::identity(dim))
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self(LinearOperator::from_real_rows(&[&[h, h], &[h, -h]]).expect("2x2"))
    }

    pub fn as_operator(&self) -> &LinearOperator {
        &self.0
    }

    pub fn into_operator(self) -> LinearOperator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        apply(&self.0, state)
    }
}

/// `u2 · u1`, i.e. evolve with `u1` first.
pub fn compose(u2: &UnitaryOperator, u1: &UnitaryOperator) -> Result<UnitaryOperator> {
    let product = u2.0.matmul(&u1.0)?;
    UnitaryOperator::with_tolerance(product, Tolerances::default().composed_unitarity)
}

/// A hermitian operator together with its spectral decomposition.
///
/// Eigenvalues are sorted in descending order. Eigenvalues closer than the
/// degeneracy tolerance are snapped to their group mean and the matching
/// eigenvectors are re-orthonormalized together.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    operator: LinearOperator,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<StateVector>,
}

impl Observable {
    pub fn operator(&self) -> &LinearOperator {
        &self.operator
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[StateVector] {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// Distinct eigenvalues, descending.
    pub fn distinct_eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &v in &self.eigenvalues {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        out
    }

    /// If `v` is an eigenvector of the operator (residual within `tol`),
    /// returns its eigenvalue `⟨v|B|v⟩ / ⟨v|v⟩`.
    pub fn eigenvalue_of(&self, v: &StateVector, tol: f64) -> Result<f64> {
        let bv = apply(&self.operator, v)?;
        let value = inner_product(v, &bv)?.re / v.norm_sqr();
        let residual = bv
            .entries()
            .iter()
            .zip(v.entries())
            .map(|(a, b)| (a - b * value).norm())
            .fold(0.0, f64::max);
        if residual > tol {
            return Err(Error::NotAnEigenvector { residual });
        }
        Ok(value)
    }

    /// Reconstruct `Σ|b_i⟩B_i⟨b_i|`.
    pub fn reconstruct(&self) -> LinearOperator {
        LinearOperator::from_spectrum(&self.eigenvalues, &self.eigenvectors)
            .expect("eigenvectors share the operator dimension")
    }
}

pub fn eigendecompose(op: &LinearOperator) -> Result<Observable> {
    eigendecompose_with(op, &Tolerances::default())
}

pub fn eigendecompose_with(op: &LinearOperator, tol: &Tolerances) -> Result<Observable> {
    let defect = op.hermiticity_defect();
    if defect > tol.hermiticity {
        return Err(Error::NotHermitian {
            defect,
            tol: tol.hermiticity,
        });
    }
    let dim = op.dim();
    // Symmetrize so the solver sees an exactly hermitian matrix.
    let m = op.to_nalgebra();
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors: Vec<Vec<C64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();

    // Group near-degenerate eigenvalues (single linkage on the sorted list).
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && values[end - 1] - values[end] <= tol.degeneracy {
            end += 1;
        }
        if end - start > 1 {
            let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
            values[start..end].iter_mut().for_each(|v| *v = mean);
        }
        gram_schmidt(&mut vectors[start..end])?;
        start = end;
    }

    let eigenvectors: Vec<StateVector> = vectors
        .into_iter()
        .map(|entries| StateVector { entries })
        .collect();
    let obs = Observable {
        operator: op.clone(),
        eigenvalues: values,
        eigenvectors,
    };
    let err = obs.reconstruct().max_abs_diff(op);
    if err > tol.eigen_residual {
        return Err(Error::NumericalFailure(format!(
            "eigendecomposition reconstruction error {err:e}"
        )));
    }
    Ok(obs)
}

/// Modified Gram-Schmidt with one re-orthogonalization pass, in place.
pub(crate) fn gram_schmidt(vectors: &mut [Vec<C64>]) -> Result<()> {
    for i in 0..vectors.len() {
        for _pass in 0..2 {
            for j in 0..i {
                let (done, rest) = vectors.split_at_mut(i);
                let proj: C64 = done[j]
                    .iter()
                    .zip(rest[0].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for (x, q) in rest[0].iter_mut().zip(done[j].iter()) {
                    *x -= proj * q;
                }
            }
        }
        let norm = vectors[i].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::NumericalFailure(
                "linearly dependent vectors in Gram-Schmidt".into(),
            ));
        }
        vectors[i].iter_mut().for_each(|x| *x /= norm);
    }
    Ok(())
}

/// `max |⟨v_i|v_j⟩ - δ_ij|` over a set of vectors.
pub fn orthonormality_defect(vectors: &[StateVector]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((inner_product(a, b)? - target).norm());
        }
    }
    Ok(worst)
}

/// `max |Σ_v |v⟩⟨v| - I|`.
pub fn completeness_defect(vectors: &[StateVector], dim: usize) -> Result<f64> {
    let mut sum = LinearOperator::zeros(dim);
    for v in vectors {
        let p = LinearOperator::outer(v, v)?;
        for (s, e) in sum.entries.iter_mut().zip(p.entries) {
            *s += e;
        }
    }
    Ok(sum.max_abs_diff(&LinearOperator::identity(dim)))
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
