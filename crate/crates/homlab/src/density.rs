//! Density matrices in the spatial-mode basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::WaveFunction;
use crate::tol;

/// n×n density matrix ρ over the spatial modes of a grid.
///
/// A matrix flagged `physical` is Hermitian within [`tol::HERMITICITY_TOL`],
/// has unit trace within [`tol::NORM_TOL`], and eigenvalues above
/// [`tol::PSD_EIGENVALUE_FLOOR`]. Raw reconstruction outputs may violate
/// positivity and carry `physical = false` until post-processed.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    grid: Grid,
    entries: DMatrix<Complex64>,
    physical: bool,
}

impl DensityMatrix {
    /// Wrap entries and validate hermiticity, trace, and positivity.
    pub fn physical(grid: Grid, entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::raw(grid, entries)?;
        let defect = rho.hermiticity_defect();
        if defect > tol::HERMITICITY_TOL {
            return Err(Error::NonPhysical(format!(
                "hermiticity defect {defect:.3e} exceeds {:.0e}",
                tol::HERMITICITY_TOL
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol::NORM_TOL || tr.im.abs() > tol::NORM_TOL {
            return Err(Error::NonPhysical(format!("trace {tr} is not 1")));
        }
        let min = rho.min_eigenvalue();
        if min < tol::PSD_EIGENVALUE_FLOOR {
            return Err(Error::NonPhysical(format!(
                "minimum eigenvalue {min:.3e} below {:.0e}",
                tol::PSD_EIGENVALUE_FLOOR
            )));
        }
        Ok(Self {
            physical: true,
            ..rho
        })
    }

    /// Wrap entries without physicality checks; the result is flagged
    /// non-physical and only accepted by simulation routines that opt in.
    pub fn raw(grid: Grid, entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != grid.len() || entries.ncols() != grid.len() {
            return Err(Error::InvalidState(format!(
                "expected a {0}x{0} matrix, got {1}x{2}",
                grid.len(),
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self {
            grid,
            entries,
            physical: false,
        })
    }

    /// Pure-state projector |ψ⟩⟨ψ|.
    pub fn from_pure(state: &WaveFunction) -> Result<Self> {
        let psi = state.normalized()?;
        let n = psi.len();
        let entries =
            DMatrix::from_fn(n, n, |i, j| psi.amplitude(i) * psi.amplitude(j).conj());
        Self::physical(psi.grid(), entries)
    }

    /// Maximally mixed state I/n.
    pub fn maximally_mixed(grid: Grid) -> Self {
        let n = grid.len();
        let entries = DMatrix::from_diagonal(&DVector::from_element(
            n,
            Complex64::new(1.0 / n as f64, 0.0),
        ));
        Self {
            grid,
            entries,
            physical: true,
        }
    }

    /// Seeded random density matrix of the requested rank, built as
    /// G·G†/tr(G·G†) from an n×rank matrix of standard complex Gaussian
    /// entries. Identical (n, rank, seed) triples give bitwise-identical
    /// matrices.
    pub fn random(grid: Grid, rank: usize, seed: u64) -> Result<Self> {
        let n = grid.len();
        if rank == 0 || rank > n {
            return Err(Error::InvalidState(format!(
                "rank must be in 1..={n}, got {rank}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, rank, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        let gram = &g * g.adjoint();
        let trace: f64 = (0..n).map(|i| gram[(i, i)].re).sum();
        let entries = gram.map(|z| z / trace);
        Self::physical(grid, entries)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }

    /// Matrix element ⟨x_i|ρ|x_j⟩.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.len()).map(|i| self.entries[(i, i)]).sum()
    }

    /// tr(ρ²); equals 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let mut acc = Complex64::ZERO;
        for i in 0..self.len() {
            for j in 0..self.len() {
                acc += self.entries[(i, j)] * self.entries[(j, i)];
            }
        }
        acc.re
    }

    /// Max-norm of ρ − ρ†.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> DVector<f64> {
        let herm = (&self.entries + self.entries.adjoint()).map(|z| z * 0.5);
        let mut vals: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        DVector::from_vec(vals)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Number of eigenvalues above `threshold`.
    pub fn rank_above(&self, threshold: f64) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > threshold).count()
    }
}
