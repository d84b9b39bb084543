//! Numerical tolerances shared across the crate.
//!
//! Formula-level tolerances apply to noiseless tables; reconstructions from
//! finite-shot count tables are judged by convergence trends instead of
//! fixed thresholds.

/// Unit-norm check on constructed states and the trace of physical ρ.
pub const NORM_TOL: f64 = 1e-12;

/// Hermiticity check on density matrices flagged physical.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalue floor for positive semidefiniteness.
pub const PSD_EIGENVALUE_FLOOR: f64 = -1e-10;

/// `is_unitary` flag: max-norm of U·U† − I.
pub const UNITARY_TOL: f64 = 1e-10;

/// Passive-network bound: singular values at most 1 + this.
pub const PASSIVITY_TOL: f64 = 1e-10;

/// Default tolerance for exchange-product phase classification. Well above
/// the accumulated rounding of a handful of matrix products, well below any
/// physical signal.
pub const CLASSIFY_TOL: f64 = 1e-10;

/// Normalization check on simulation inputs.
pub const INPUT_NORM_TOL: f64 = 1e-10;

/// Probabilities may round to at most this far below zero before being
/// clamped to zero.
pub const PROB_NEGATIVE_TOL: f64 = 1e-14;

/// Amplitude mask threshold, relative to the largest reconstructed
/// amplitude. Phase reconstruction divides by |ψ(x)| and is undefined below
/// this.
pub const AMPLITUDE_MASK_FACTOR: f64 = 1e-8;

/// How far the radicand in amplitude reconstruction may round below zero.
pub const RADICAND_TOL: f64 = 1e-12;

/// Allowed excursion of reconstructed cos values outside [-1, 1].
pub const COS_RANGE_TOL: f64 = 1e-8;

/// Residual bound for a satisfying branch-sign assignment when recovering
/// phases from a cos matrix.
pub const PHASE_CONSISTENCY_TOL: f64 = 1e-6;

/// Cos values within this of ±1 are snapped to exactly ±1 before arccos.
/// Below this distance the angle is under the inversion's conditioning
/// limit (arccos turns an ulp into a √ulp phase error), so snapping loses
/// nothing and keeps exactly-real states exactly real.
pub const COS_SNAP_TOL: f64 = 1e-14;
