//! Exchange statistics and single-particle wave functions.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Exchange statistics of the interfering particle pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleStatistics {
    Boson,
    Fermion,
}

impl ParticleStatistics {
    /// The ± sign carried by every position-exchanged cross term: +1 for
    /// bosons, −1 for fermions.
    pub fn sign(self) -> f64 {
        match self {
            ParticleStatistics::Boson => 1.0,
            ParticleStatistics::Fermion => -1.0,
        }
    }
}

impl std::fmt::Display for ParticleStatistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParticleStatistics::Boson => write!(f, "boson"),
            ParticleStatistics::Fermion => write!(f, "fermion"),
        }
    }
}

/// Complex amplitude vector ψ(x) over the spatial modes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    amplitudes: DVector<Complex64>,
}

impl WaveFunction {
    /// Wrap raw amplitudes; the length must match the grid.
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidState(format!(
                "expected {} amplitudes, got {}",
                grid.len(),
                amplitudes.len()
            )));
        }
        Ok(Self {
            grid,
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    /// Flat reference profile: every amplitude equal to the real positive
    /// constant c = 1/√n, so the state is normalized by construction.
    pub fn flat(grid: Grid) -> Self {
        let c = Complex64::new(1.0 / (grid.len() as f64).sqrt(), 0.0);
        Self {
            grid,
            amplitudes: DVector::from_element(grid.len(), c),
        }
    }

    /// The flat-reference amplitude 1/√n for this grid.
    pub fn flat_amplitude(grid: Grid) -> f64 {
        1.0 / (grid.len() as f64).sqrt()
    }

    /// Normalized Gaussian profile centered at `center` with density
    /// standard deviation `width`.
    pub fn gaussian(grid: Grid, center: f64, width: f64) -> Result<Self> {
        if !width.is_finite() || width <= 0.0 || !center.is_finite() {
            return Err(Error::InvalidState(format!(
                "gaussian needs finite center and width > 0, got center={center} width={width}"
            )));
        }
        let amplitudes: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let d = grid.x(i) - center;
                Complex64::new((-d * d / (4.0 * width * width)).exp(), 0.0)
            })
            .collect();
        Self::new(grid, amplitudes)?.normalized()
    }

    /// Flat-modulus state with a linear phase ramp, ψ(x_i) ∝ exp(i·k·x_i).
    pub fn phase_ramp(grid: Grid, k: f64) -> Self {
        let c = 1.0 / (grid.len() as f64).sqrt();
        let amplitudes =
            DVector::from_fn(grid.len(), |i, _| Complex64::from_polar(c, k * grid.x(i)));
        Self { grid, amplitudes }
    }

    /// Normalized state with seeded standard complex Gaussian amplitudes.
    /// Identical (grid, seed) pairs produce identical states.
    pub fn random(grid: Grid, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amplitudes: Vec<Complex64> = (0..grid.len())
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self::new(grid, amplitudes)
            .and_then(|s| s.normalized())
            .expect("Gaussian amplitudes are nonzero")
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

    /// Amplitude at mode `i`.
    pub fn amplitude(&self, i: usize) -> Complex64 {
        self.amplitudes[i]
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// Σ|ψ(x_i)|².
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// ⟨self|other⟩ = Σ conj(self_i)·other_i.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Unit-norm copy with the direction preserved. Rejects the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 <= 0.0 {
            return Err(Error::InvalidState(
                "cannot normalize the zero vector".into(),
            ));
        }
        let inv = 1.0 / n2.sqrt();
        Ok(Self {
            grid: self.grid,
            amplitudes: self.amplitudes.map(|a| a * inv),
        })
    }

    /// Elementwise complex conjugate. The norm is unchanged; for any
    /// lossless setup with a real reference the conjugate produces the same
    /// outcome table as the original.
    pub fn conjugate(&self) -> Self {
        Self {
            grid: self.grid,
            amplitudes: self.amplitudes.map(|a| a.conj()),
        }
    }
}
