//! Two-particle interference simulator and transverse-profile tomography.
//!
//! The crate computes joint detection probability tables for a pair of
//! bosons or fermions sent through a configurable two-port or four-mode
//! network (unitary or lossy), and inverts those tables to recover the
//! unknown particle's transverse profile: amplitude and local phase for
//! pure states, full density matrices for mixed states.
//!
//! The transverse coordinate is discretized into `n` orthonormal spatial
//! modes, so probability sums and the inversion formulas are exact finite
//! sums rather than quadrature approximations.
//!
//! Module map:
//!
//! * [`grid`], [`state`], [`density`], [`modes`] — domain types: grids,
//!   wave functions, density matrices, exchange statistics, mode labels.
//! * [`optics`] — transfer matrices: beam splitter, polarization elements,
//!   the engineered-loss composite, the four-mode network, and the
//!   exchange products that decide which part of ρ is observable.
//! * [`interferometer`] — forward simulation from (state, reference,
//!   matrix, statistics) to exclusive-outcome probability tables, plus
//!   finite-shot sampling.
//! * [`tomography`] — inversion of outcome tables into amplitude/phase
//!   profiles and density-matrix estimates.
//! * [`io`] — JSON state files and CSV table emission/parsing.
//!
//! With the `parallel` feature (default) table construction and per-pair
//! reconstruction run on the current rayon pool; results are identical to
//! the sequential fallback.

pub mod density;
pub mod error;
mod exec;
pub mod grid;
pub mod interferometer;
pub mod io;
pub mod modes;
pub mod optics;
pub mod state;
pub mod tol;
pub mod tomography;

pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use grid::Grid;
pub use modes::{ModeLabel, Polarization};
pub use state::{ParticleStatistics, WaveFunction};
