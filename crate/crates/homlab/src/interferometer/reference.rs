//! Independent forward route used as a cross-check against the closed-form
//! simulation.
//!
//! Instead of evaluating per-outcome products of matrix entries, this route
//! evolves each particle's single-particle vector through the network
//! (mode ⊗ position space) and reads joint amplitudes off the evolved
//! vectors; mixed states are handled by eigendecomposing ρ and mixing the
//! pure-state results. Both routes compute the same physics, but share no
//! code, so index, conjugation, and sign mistakes in one are caught by the
//! other.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::exec;
use crate::interferometer::{outcome_keys, OutcomeTable};
use crate::optics::TransferMatrix;
use crate::state::{ParticleStatistics, WaveFunction};
use crate::tol;

/// Single-particle vector over (mode, position) after the network: the
/// particle entered `mode_in` with profile `psi`.
fn evolved_vector(u: &TransferMatrix, mode_in: usize, psi: &[Complex64]) -> Vec<Complex64> {
    let m = u.mode_count();
    let n = psi.len();
    let mut out = Vec::with_capacity(m * n);
    for mode in 0..m {
        let gain = u.entry(mode, mode_in);
        for amp in psi {
            out.push(gain * amp);
        }
    }
    out
}

fn table_from_amplitude_pairs(
    u: &TransferMatrix,
    contributions: &[(f64, Vec<Complex64>, Vec<Complex64>)],
    grid: crate::grid::Grid,
    statistics: ParticleStatistics,
) -> Result<OutcomeTable> {
    let n = grid.len();
    let keys = outcome_keys(u.mode_count(), n);
    let s = statistics.sign();
    let values = exec::map_ordered(&keys, |key| {
        let a = key.first().mode * n + key.first().pos;
        let b = key.second().mode * n + key.second().pos;
        let divisor = if key.is_diagonal() { 2.0 } else { 1.0 };
        contributions
            .iter()
            .map(|(weight, gu, gr)| {
                let amp = gu[a] * gr[b] + s * gu[b] * gr[a];
                weight * amp.norm_sqr() / divisor
            })
            .sum::<f64>()
    });
    let mut probabilities = BTreeMap::new();
    for (key, p) in keys.into_iter().zip(values) {
        probabilities.insert(key, p.max(0.0));
    }
    OutcomeTable::from_parts(
        grid,
        statistics,
        "reference route".to_string(),
        u.output_labels().to_vec(),
        probabilities,
    )
}

/// Reference-route table for a pure unknown state entering `u_in` and the
/// reference entering `r_in`.
pub fn pure_table(
    u: &TransferMatrix,
    psi_u: &WaveFunction,
    psi_r: &WaveFunction,
    u_in: usize,
    r_in: usize,
    statistics: ParticleStatistics,
) -> Result<OutcomeTable> {
    if psi_u.grid() != psi_r.grid() {
        return Err(Error::GridMismatch(
            "unknown state and reference live on different grids".into(),
        ));
    }
    let gu = evolved_vector(u, u_in, psi_u.amplitudes().as_slice());
    let gr = evolved_vector(u, r_in, psi_r.amplitudes().as_slice());
    table_from_amplitude_pairs(
        u,
        &[(1.0, gu, gr)],
        psi_u.grid(),
        statistics,
    )
}

/// Reference-route table for a mixed unknown state: eigendecompose ρ and
/// mix the pure-state tables of its eigenvectors.
pub fn mixed_table(
    u: &TransferMatrix,
    rho_u: &DensityMatrix,
    psi_r: &WaveFunction,
    u_in: usize,
    r_in: usize,
    statistics: ParticleStatistics,
) -> Result<OutcomeTable> {
    if rho_u.grid() != psi_r.grid() {
        return Err(Error::GridMismatch(
            "density matrix and reference live on different grids".into(),
        ));
    }
    let herm = (rho_u.entries() + rho_u.entries().adjoint()).map(|z| z * 0.5);
    let eig = herm.symmetric_eigen();
    let gr = evolved_vector(u, r_in, psi_r.amplitudes().as_slice());
    let mut contributions = Vec::new();
    for (idx, &weight) in eig.eigenvalues.iter().enumerate() {
        if weight <= tol::HERMITICITY_TOL {
            continue;
        }
        let column: Vec<Complex64> = eig.eigenvectors.column(idx).iter().copied().collect();
        contributions.push((weight, evolved_vector(u, u_in, &column), gr.clone()));
    }
    table_from_amplitude_pairs(u, &contributions, rho_u.grid(), statistics)
}
