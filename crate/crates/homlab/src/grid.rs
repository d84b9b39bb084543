//! Discretization of the transverse coordinate into orthonormal spatial modes.

use crate::error::{Error, Result};

/// Uniform grid of `n` midpoint-sampled spatial modes on `[x_min, x_max]`.
///
/// Mode `i` sits at `x_i = x_min + (i + 1/2)·dx` with `dx = (x_max − x_min)/n`.
/// The modes form an orthonormal discrete basis, so normalization and
/// probability sums are exact; continuous densities of the underlying model
/// are recovered as `p / dx²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid {
    /// Build a grid with `n ≥ 2` modes on a non-degenerate interval.
    pub fn new(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!(
                "mode count must be at least 2, got {n}"
            )));
        }
        if !x_min.is_finite() || !x_max.is_finite() || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "interval [{x_min}, {x_max}] is degenerate"
            )));
        }
        Ok(Self { n, x_min, x_max })
    }

    /// Number of spatial modes.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Grids always hold at least two modes.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Mode spacing.
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    /// Midpoint position of mode `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    /// All mode positions in index order.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_positions() {
        let g = Grid::new(4, 0.0, 4.0).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.positions(), vec![0.5, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn centered_interval() {
        let g = Grid::new(2, -1.0, 1.0).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.positions(), vec![-0.5, 0.5]);
    }

    #[test]
    fn rejects_single_mode() {
        assert!(Grid::new(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn rejects_degenerate_interval() {
        assert!(Grid::new(4, 1.0, 1.0).is_err());
        assert!(Grid::new(4, 2.0, 1.0).is_err());
        assert!(Grid::new(4, 0.0, f64::INFINITY).is_err());
    }
}
