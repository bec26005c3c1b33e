//! Virtual-pathway analysis of pre- and post-selected quantum systems.
//!
//! A scenario fixes an initial state, a final (post-selected) state, the
//! unitary evolution between a handful of intermediate time slices, and an
//! orthonormal basis at each slice. From it the crate computes:
//!
//! - the amplitude of every virtual path ([`pathways::enumerate_paths`]),
//! - real-valued functionals over paths and their coarse-grained branches
//!   ([`pathways::coarse_grain`]),
//! - strong-meter probabilities and conditional means, weak values and sum
//!   rules ([`measurement`]),
//! - an explicit Gaussian pointer model that moves between the weak and
//!   strong regimes ([`metersim`]),
//! - seeded Monte Carlo tallies of measurement-plus-post-selection trials
//!   ([`montecarlo`]).
//!
//! ```
//! use weakpath::{measurement, pathways, scenario};
//!
//! let spec = scenario::builtin("three_path")?;
//! let paths = pathways::enumerate_paths(&spec)?;
//! let (_, def) = spec.meter("O")?;
//! let (_, branches) = pathways::branches_for(&spec, &paths, def)?;
//! let weak = measurement::weak_statistics(&branches)?;
//! assert!(weak.weak_value.norm() < 1e-12);
//! # Ok::<(), weakpath::Error>(())
//! ```

// NaN must fail tolerance checks, hence the `!(x <= tol)` spelling.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod hilbert;
pub mod measurement;
pub mod metersim;
pub mod montecarlo;
pub mod pathways;
pub mod scenario;

pub use error::{Error, Result};
pub use hilbert::C64;
