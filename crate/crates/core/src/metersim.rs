//! Von Neumann pointer model with a Gaussian meter.
//!
//! The pointer starts in `G(x) = (2πσ²)^{-1/4} exp(-x²/4σ²)`, so `|G|²` has
//! variance `σ²`. An impulsive coupling shifts the pointer by `λ𝓕_k` on
//! branch `k`; after post-selection the pointer is left in
//!
//! ```text
//! Φ(x) = Σ_k Ã_k G(x - λ𝓕_k)
//! ```
//!
//! With `ħ = 1`, for `λ/σ → 0`:
//!
//! ```text
//! ⟨x⟩ → λ Re[B_w]        ⟨p⟩ → λ Im[B_w] / (2σ²)
//! ```
//!
//! and for `λ/σ → ∞` the position mean approaches the strong conditional
//! mean while `⟨p⟩ → 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::measurement::{strong_statistics, weak_statistics, POSTSELECTION_FLOOR};
use crate::pathways::BranchDecomposition;

pub const DEFAULT_GRID_POINTS: usize = 4096;
pub const MIN_GRID_POINTS: usize = 512;
/// Grid half-width beyond the largest pointer shift, in units of `σ`.
const TAIL_WIDTHS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    Position,
    Momentum,
}

impl std::str::FromStr for Readout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" | "x" => Ok(Readout::Position),
            "momentum" | "p" => Ok(Readout::Momentum),
            other => Err(Error::InvalidMeter(format!("unknown readout `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeterConfig {
    coupling: f64,
    width: f64,
    readout: Readout,
}

impl MeterConfig {
    pub fn new(coupling: f64, width: f64, readout: Readout) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::InvalidMeter(format!(
                "coupling must be finite and > 0, got {coupling}"
            )));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidMeter(format!(
                "width must be finite and > 0, got {width}"
            )));
        }
        Ok(Self {
            coupling,
            width,
            readout,
        })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn readout(&self) -> Readout {
        self.readout
    }

    /// `λ/σ`.
    pub fn ratio(&self) -> f64 {
        self.coupling / self.width
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(coupling, self.width, self.readout)
    }
}

/// Post-selected pointer wavefunction sampled on a uniform symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerDistribution {
    pub grid: Vec<f64>,
    pub wavefunction: Vec<C64>,
    pub norm_sqr: f64,
    pub spacing: f64,
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    (2.0 * PI * sigma * sigma).powf(-0.25) * (-x * x / (4.0 * sigma * sigma)).exp()
}

fn trapezoid(values: impl Iterator<Item = f64>, dx: f64, n: usize) -> f64 {
    let mut sum = 0.0;
    for (j, v) in values.enumerate() {
        let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
        sum += w * v;
    }
    sum * dx
}

/// Couple the meter to every branch and post-select.
pub fn entangle_and_postselect(
    branches: &BranchDecomposition,
    meter: &MeterConfig,
    grid_points: usize,
) -> Result<PointerDistribution> {
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least {MIN_GRID_POINTS} points, got {grid_points}"
        )));
    }
    if branches
        .branch_amplitudes
        .iter()
        .all(|a| a.norm_sqr() == 0.0)
    {
        return Err(Error::DegeneratePointerNorm);
    }
    let (lambda, sigma) = (meter.coupling, meter.width);
    let max_shift = branches
        .branch_values
        .iter()
        .map(|f| (lambda * f).abs())
        .fold(0.0, f64::max);
    let half = max_shift + TAIL_WIDTHS * sigma;
    let spacing = 2.0 * half / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points)
        .map(|j| -half + j as f64 * spacing)
        .collect();
    let wavefunction: Vec<C64> = grid
        .iter()
        .map(|&x| {
            branches
                .branch_values
                .iter()
                .zip(&branches.branch_amplitudes)
                .map(|(f, a)| a * gaussian(x - lambda * f, sigma))
                .sum()
        })
        .collect();
    let norm_sqr = trapezoid(
        wavefunction.iter().map(|c| c.norm_sqr()),
        spacing,
        grid_points,
    );
    if !(norm_sqr > POSTSELECTION_FLOOR) {
        return Err(Error::DegeneratePointerNorm);
    }
    Ok(PointerDistribution {
        grid,
        wavefunction,
        norm_sqr,
        spacing,
    })
}

/// `⟨x⟩ = ∫x|Φ|² / ∫|Φ|²`.
pub fn pointer_mean_position(dist: &PointerDistribution) -> Result<f64> {
    if !(dist.norm_sqr > POSTSELECTION_FLOOR) {
        return Err(Error::DegeneratePointerNorm);
    }
    let n = dist.grid.len();
    let first = trapezoid(
        dist.grid
            .iter()
            .zip(&dist.wavefunction)
            .map(|(x, c)| x * c.norm_sqr()),
        dist.spacing,
        n,
    );
    Ok(first / dist.norm_sqr)
}

/// Sixth-order central difference; the grid edges sit deep in the Gaussian
/// tails, where lower-order stencils are used.
fn derivative(values: &[C64], dx: f64) -> Vec<C64> {
    let n = values.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        out[j] = if j >= 3 && j + 3 < n {
            (45.0 * (values[j + 1] - values[j - 1]) - 9.0 * (values[j + 2] - values[j - 2])
                + (values[j + 3] - values[j - 3]))
                / (60.0 * dx)
        } else if j >= 1 && j + 1 < n {
            (values[j + 1] - values[j - 1]) / (2.0 * dx)
        } else if j == 0 {
            (values[1] - values[0]) / dx
        } else {
            (values[j] - values[j - 1]) / dx
        };
    }
    out
}

/// `⟨p⟩ = ∫ Φ* (-i dΦ/dx) / ∫|Φ|²` (real part), with `ħ = 1`.
pub fn pointer_mean_momentum(dist: &PointerDistribution) -> Result<f64> {
    if !(dist.norm_sqr > POSTSELECTION_FLOOR) {
        return Err(Error::DegeneratePointerNorm);
    }
    let d = derivative(&dist.wavefunction, dist.spacing);
    // Re[Φ* (-i Φ')] = Im[Φ* Φ']
    let n = dist.grid.len();
    let first = trapezoid(
        dist.wavefunction
            .iter()
            .zip(&d)
            .map(|(phi, dphi)| (phi.conj() * dphi).im),
        dist.spacing,
        n,
    );
    Ok(first / dist.norm_sqr)
}

/// Mean for the configured readout.
pub fn pointer_mean(dist: &PointerDistribution, readout: Readout) -> Result<f64> {
    match readout {
        Readout::Position => pointer_mean_position(dist),
        Readout::Momentum => pointer_mean_momentum(dist),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerMeans {
    pub position: f64,
    pub momentum: f64,
}

/// Closed-form pointer means from Gaussian overlaps
/// `O_kl = exp(-λ²(𝓕_k-𝓕_l)²/8σ²)`:
///
/// ```text
/// ⟨x⟩ = Σ c_kl O_kl λ(𝓕_k+𝓕_l)/2 / Σ c_kl O_kl
/// ⟨p⟩ = Re Σ c_kl O_kl · iλ(𝓕_k-𝓕_l)/4σ² / Σ c_kl O_kl,   c_kl = conj(Ã_k) Ã_l
/// ```
pub fn analytic_pointer_mean(
    branches: &BranchDecomposition,
    meter: &MeterConfig,
) -> Result<PointerMeans> {
    let (lambda, sigma) = (meter.coupling, meter.width);
    let values = &branches.branch_values;
    let amps = &branches.branch_amplitudes;
    let mut norm = 0.0;
    let mut position = 0.0;
    let mut momentum = 0.0;
    for (k, (fk, ak)) in values.iter().zip(amps).enumerate() {
        for (l, (fl, al)) in values.iter().zip(amps).enumerate() {
            let c = ak.conj() * al;
            let diff = lambda * (fk - fl);
            let overlap = (-diff * diff / (8.0 * sigma * sigma)).exp();
            let weight = c * overlap;
            norm += weight.re;
            position += weight.re * lambda * (fk + fl) / 2.0;
            // Re[i w d] = -Im[w] d
            if k != l {
                momentum -= weight.im * diff / (4.0 * sigma * sigma);
            }
        }
    }
    if !(norm > POSTSELECTION_FLOOR) {
        return Err(Error::DegeneratePointerNorm);
    }
    Ok(PointerMeans {
        position: position / norm,
        momentum: momentum / norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub coupling: f64,
    /// Grid mean divided by `λ`.
    pub normalized_shift: f64,
    /// Closed-form mean divided by `λ`.
    pub analytic_shift: f64,
    /// Weak-limit prediction for the normalized shift; `None` when the
    /// transition amplitude vanishes.
    pub weak_prediction: Option<f64>,
    /// Strong-limit prediction; `None` when post-selection is impossible.
    pub strong_prediction: Option<f64>,
}

/// Normalized pointer shift across `λ/σ`, with both limiting predictions.
/// The pointer width is taken from `base`; the coupling is `ratio · σ`.
pub fn regime_sweep(
    branches: &BranchDecomposition,
    base: &MeterConfig,
    ratios: &[f64],
    grid_points: usize,
) -> Result<Vec<SweepRow>> {
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidArgument(
            "sweep ratios must be finite and positive".into(),
        ));
    }
    if ratios.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("sweep ratios must be sorted".into()));
    }
    let sigma = base.width;
    let weak = weak_statistics(branches).ok().map(|w| w.weak_value);
    let strong = strong_statistics(branches).ok().map(|s| s.conditional_mean);
    let (weak_prediction, strong_prediction) = match base.readout {
        Readout::Position => (weak.map(|w| w.re), strong),
        Readout::Momentum => (
            weak.map(|w| w.im / (2.0 * sigma * sigma)),
            strong.map(|_| 0.0),
        ),
    };
    ratios
        .iter()
        .map(|&ratio| {
            let meter = base.with_coupling(ratio * sigma)?;
            let dist = entangle_and_postselect(branches, &meter, grid_points)?;
            let grid_mean = pointer_mean(&dist, meter.readout)?;
            let analytic = analytic_pointer_mean(branches, &meter)?;
            let analytic_mean = match meter.readout {
                Readout::Position => analytic.position,
                Readout::Momentum => analytic.momentum,
            };
            Ok(SweepRow {
                ratio,
                coupling: meter.coupling,
                normalized_shift: grid_mean / meter.coupling,
                analytic_shift: analytic_mean / meter.coupling,
                weak_prediction,
                strong_prediction,
            })
        })
        .collect()
}
