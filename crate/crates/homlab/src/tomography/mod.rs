//! Inversion of outcome tables into state estimates.
//!
//! Pure states: the balanced-splitter/flat-reference table determines the
//! amplitude |ψ(x)| and the cosines of pairwise phase differences; phases
//! follow up to the fundamental conjugation ambiguity, so reconstruction
//! returns the (ψ, ψ*) pair.
//!
//! Mixed states: linear inversion of the probability model through the
//! exchange products of the setup. A lossless two-port setup exposes only
//! Re ρ; the engineered-loss matrix at η = √2 − 1 exposes Re ρ on same-port
//! outcomes and Im ρ on coincidence outcomes in one go; the four-mode
//! polarization network exposes everything through four densities.
//! Estimates record what the data could not determine instead of guessing.

mod mixed;
mod pure;

pub use mixed::{
    reconstruct_rho_general, reconstruct_rho_polarized, reconstruct_rho_polarized_from_set,
    DetectorVariant, PolarizedSet,
};
pub use pure::{
    pure_candidates, pure_candidates_with_tol, reconstruct_amplitude, reconstruct_amplitude_for,
    reconstruct_cos_phase, reconstruct_cos_phase_for,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::WaveFunction;
use crate::tol;

/// Reconstructed modulus profile |ψ_u(x_i)|.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeProfile {
    grid: Grid,
    values: Vec<f64>,
}

impl AmplitudeProfile {
    pub(crate) fn new(grid: Grid, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Σ values².
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Reconstructed cos[φ(x_i) − φ(x_j)] with a mask on entries where either
/// amplitude is too small for the division to mean anything.
#[derive(Debug, Clone, PartialEq)]
pub struct CosPhaseMatrix {
    grid: Grid,
    values: DMatrix<f64>,
    masked: DMatrix<bool>,
}

impl CosPhaseMatrix {
    pub(crate) fn new(grid: Grid, values: DMatrix<f64>, masked: DMatrix<bool>) -> Self {
        Self {
            grid,
            values,
            masked,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Cos value at (i, j); meaningless when `is_masked(i, j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.masked[(i, j)]
    }

    pub fn masked_fraction(&self) -> f64 {
        let n = self.grid.len();
        let count = self.masked.iter().filter(|&&m| m).count();
        count as f64 / (n * n) as f64
    }
}

/// The conjugate pair of pure-state candidates consistent with a measured
/// table. Both reproduce the table; no lossless measurement with a real
/// reference can tell them apart.
#[derive(Debug, Clone, PartialEq)]
pub struct PureCandidates {
    pub primary: WaveFunction,
    pub conjugate: WaveFunction,
    /// True when the cos data alone did not pin down the relative branch
    /// signs (for example, every cos value is ±1).
    pub sign_ambiguous: bool,
}

impl PureCandidates {
    pub fn pair(&self) -> [&WaveFunction; 2] {
        [&self.primary, &self.conjugate]
    }
}

/// Health indicators of a reconstructed density estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoDiagnostics {
    /// Max-norm asymmetry of the raw reconstruction before enforcing
    /// hermiticity.
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of the hermitized estimate.
    pub min_eigenvalue: f64,
    /// Trace of the hermitized estimate.
    pub trace: f64,
}

/// Raw density-matrix estimate: symmetric real part, antisymmetric
/// imaginary part, and flags for which components the setup actually
/// exposed. Diagonal entries always land in `re`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoEstimate {
    grid: Grid,
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    re_present: bool,
    im_present: bool,
    physical: bool,
    diagnostics: RhoDiagnostics,
}

impl RhoEstimate {
    /// Build an estimate from raw component matrices, e.g. to combine the
    /// real part read out by one setup with the imaginary part read out by
    /// another. `re` is symmetrized, `im` antisymmetrized, and the worst
    /// asymmetry is recorded as the hermiticity defect.
    pub fn from_components(
        grid: Grid,
        re_raw: DMatrix<f64>,
        im_raw: DMatrix<f64>,
        re_present: bool,
        im_present: bool,
    ) -> Self {
        let n = grid.len();
        let mut re = DMatrix::zeros(n, n);
        let mut im = DMatrix::zeros(n, n);
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                re[(i, j)] = 0.5 * (re_raw[(i, j)] + re_raw[(j, i)]);
                im[(i, j)] = 0.5 * (im_raw[(i, j)] - im_raw[(j, i)]);
                let asym = Complex64::new(
                    re_raw[(i, j)] - re_raw[(j, i)],
                    im_raw[(i, j)] + im_raw[(j, i)],
                );
                defect = defect.max(asym.norm());
            }
        }
        let complex = assemble_complex(&re, &im);
        let herm = DensityMatrix::raw(grid, complex).expect("dimensions match by construction");
        let min_eigenvalue = herm.min_eigenvalue();
        let trace = herm.trace().re;
        let physical = re_present
            && im_present
            && min_eigenvalue >= tol::PSD_EIGENVALUE_FLOOR
            && (trace - 1.0).abs() <= 1e-10;
        Self {
            grid,
            re,
            im,
            re_present,
            im_present,
            physical,
            diagnostics: RhoDiagnostics {
                hermiticity_defect: defect,
                min_eigenvalue,
                trace,
            },
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.im
    }

    /// Whether the setup exposed the real part of off-diagonal elements.
    pub fn re_present(&self) -> bool {
        self.re_present
    }

    /// Whether the setup exposed the imaginary part of off-diagonal
    /// elements. Always false for a single unitary-setup table.
    pub fn im_present(&self) -> bool {
        self.im_present
    }

    /// Component names the source data could not determine.
    pub fn missing_components(&self) -> Vec<&'static str> {
        let mut missing = Vec::new();
        if !self.re_present {
            missing.push("re");
        }
        if !self.im_present {
            missing.push("im");
        }
        missing
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn diagnostics(&self) -> RhoDiagnostics {
        self.diagnostics
    }

    /// The hermitized complex estimate sym(re) + i·antisym(im).
    pub fn complex_matrix(&self) -> DMatrix<Complex64> {
        assemble_complex(&self.re, &self.im)
    }

    /// Row-major copy of the real component.
    pub fn re_row_major(&self) -> Vec<f64> {
        let n = self.grid.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| self.re[(i, j)]))
            .collect()
    }

    /// Row-major copy of the imaginary component.
    pub fn im_row_major(&self) -> Vec<f64> {
        let n = self.grid.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| self.im[(i, j)]))
            .collect()
    }

    /// Largest |estimate − truth| over all entries.
    pub fn max_entry_error(&self, truth: &DensityMatrix) -> f64 {
        let est = self.complex_matrix();
        let n = self.grid.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((est[(i, j)] - truth.get(i, j)).norm());
            }
        }
        worst
    }

    /// Frobenius distance to a reference density matrix.
    pub fn frobenius_error(&self, truth: &DensityMatrix) -> f64 {
        let est = self.complex_matrix();
        let n = self.grid.len();
        let mut acc = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                acc += (est[(i, j)] - truth.get(i, j)).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Assemble into a density matrix, optionally projecting to the
    /// physical set.
    pub fn to_density(&self, project: bool) -> Result<AssembledDensity> {
        assemble_density(self.grid, &self.re, &self.im, project)
    }
}

fn assemble_complex(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
        Complex64::new(re[(i, j)], im[(i, j)])
    })
}

/// A density matrix assembled from reconstructed components, with the
/// numbers that describe how far the raw reconstruction was from physical.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledDensity {
    pub rho: DensityMatrix,
    pub hermiticity_defect: f64,
    pub raw_min_eigenvalue: f64,
    pub raw_trace: f64,
    /// Frobenius distance moved by the projection; 0 when the raw matrix
    /// was already physical.
    pub projection_distance: f64,
}

/// Combine component matrices into ρ = sym(re) + i·antisym(im).
///
/// With `project` the result is clipped to the nearest positive
/// semidefinite matrix in Frobenius norm (eigenvalue clipping) and trace
/// renormalized; an estimate that already satisfies the physicality
/// tolerances passes through untouched.
pub fn assemble_density(
    grid: Grid,
    re: &DMatrix<f64>,
    im: &DMatrix<f64>,
    project: bool,
) -> Result<AssembledDensity> {
    let n = grid.len();
    if re.nrows() != n || re.ncols() != n || im.nrows() != n || im.ncols() != n {
        return Err(Error::GridMismatch(format!(
            "component matrices must be {n}x{n}"
        )));
    }
    let mut defect = 0.0f64;
    let mut re_sym = DMatrix::zeros(n, n);
    let mut im_asym = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            re_sym[(i, j)] = 0.5 * (re[(i, j)] + re[(j, i)]);
            im_asym[(i, j)] = 0.5 * (im[(i, j)] - im[(j, i)]);
            let asym = Complex64::new(re[(i, j)] - re[(j, i)], im[(i, j)] + im[(j, i)]);
            defect = defect.max(asym.norm());
        }
    }
    let raw = assemble_complex(&re_sym, &im_asym);
    let raw_density = DensityMatrix::raw(grid, raw.clone())?;
    let raw_min_eigenvalue = raw_density.min_eigenvalue();
    let raw_trace = raw_density.trace().re;

    if let Ok(physical) = DensityMatrix::physical(grid, raw.clone()) {
        return Ok(AssembledDensity {
            rho: physical,
            hermiticity_defect: defect,
            raw_min_eigenvalue,
            raw_trace,
            projection_distance: 0.0,
        });
    }
    if !project {
        return Ok(AssembledDensity {
            rho: raw_density,
            hermiticity_defect: defect,
            raw_min_eigenvalue,
            raw_trace,
            projection_distance: 0.0,
        });
    }

    let eig = raw.clone().symmetric_eigen();
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::Reconstruction(
            "trace is not positive after eigenvalue clipping".into(),
        ));
    }
    let scaled = DVector::from_vec(clipped.iter().map(|&v| v / total).collect::<Vec<_>>());
    let mut projected = &eig.eigenvectors
        * DMatrix::from_diagonal(&scaled.map(|v| Complex64::new(v, 0.0)))
        * eig.eigenvectors.adjoint();
    // products leave rounding-level asymmetry behind
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (projected[(i, j)] + projected[(j, i)].conj());
            projected[(i, j)] = avg;
            projected[(j, i)] = avg.conj();
        }
    }
    for i in 0..n {
        projected[(i, i)] = Complex64::new(projected[(i, i)].re, 0.0);
    }
    let distance = (&projected - &raw).map(|z| z.norm_sqr()).sum().sqrt();
    let rho = DensityMatrix::physical(grid, projected)?;
    Ok(AssembledDensity {
        rho,
        hermiticity_defect: defect,
        raw_min_eigenvalue,
        raw_trace,
        projection_distance: distance,
    })
}

/// Defect of the four-quadratic-form identity that recovers ρ(i, j) from
/// expectation values in the superposition states |x_i⟩ ± |x_j⟩ and
/// |x_i⟩ ± i|x_j⟩. Zero (to rounding) for every matrix.
pub fn parallelogram_check(rho: &DensityMatrix, i: usize, j: usize) -> Result<f64> {
    let n = rho.len();
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange(format!(
            "indices ({i}, {j}) outside 0..{n}"
        )));
    }
    let quad = |vi: Complex64, vj: Complex64| -> Complex64 {
        vi.conj() * rho.get(i, i) * vi
            + vi.conj() * rho.get(i, j) * vj
            + vj.conj() * rho.get(j, i) * vi
            + vj.conj() * rho.get(j, j) * vj
    };
    let one = Complex64::ONE;
    let q_plus = quad(one, one);
    let q_minus = quad(one, -one);
    let q_plus_i = quad(one, Complex64::I);
    let q_minus_i = quad(one, -Complex64::I);
    let combo = q_plus - q_minus - Complex64::I * q_plus_i + Complex64::I * q_minus_i;
    Ok((4.0 * rho.get(i, j) - combo).norm())
}

/// Distance between states modulo the unobservable global phase:
/// min over φ of ‖e^{iφ}·a − b‖₂. The optimal rotation is applied and the
/// residual summed directly, so distances far below √ε stay resolvable.
pub fn global_phase_distance(a: &WaveFunction, b: &WaveFunction) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(
            "states live on different grids".into(),
        ));
    }
    let overlap = a.inner(b);
    let rotation = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::ONE
    };
    let residual: f64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(&x, &y)| (rotation * x - y).norm_sqr())
        .sum();
    Ok(residual.sqrt())
}
