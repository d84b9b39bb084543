//! Pure-state reconstruction: amplitude profile, cos-phase matrix, and the
//! conjugate candidate pair.
//!
//! All three steps assume a table produced by the balanced splitter with a
//! flat real reference of amplitude c. The modulus comes from same-position
//! cells; pairwise phase cosines come from the signed sum over the second
//! detector port; local phases are then anchored at the largest-amplitude
//! point and propagated through arccos with branch signs chosen for global
//! consistency. What survives is exactly the conjugation ambiguity, so the
//! result is the (ψ, ψ*) pair.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interferometer::OutcomeTable;
use crate::state::{ParticleStatistics, WaveFunction};
use crate::tol;
use crate::tomography::{AmplitudeProfile, CosPhaseMatrix, PureCandidates};

/// Below this, sin θ is treated as zero and the branch sign of θ is
/// immaterial at working precision.
const SIN_NODE_FLOOR: f64 = 1e-9;
/// Minimum weight sinθ_i·sinθ_j for a pairwise sign vote.
const VOTE_WEIGHT_FLOOR: f64 = 1e-10;

/// Reconstruct |ψ_u(x_i)| from same-position cells, reading the detector at
/// port α = 1. See [`reconstruct_amplitude_for`] to choose the port.
pub fn reconstruct_amplitude(table: &OutcomeTable, c: f64) -> Result<AmplitudeProfile> {
    reconstruct_amplitude_for(table, c, 1)
}

/// Reconstruct |ψ_u(x_i)| = (1/c)·√(p_{α,1}(x_i,x_i) + p_{α,2}(x_i,x_i)).
/// Both port choices must agree on a consistent table.
pub fn reconstruct_amplitude_for(
    table: &OutcomeTable,
    c: f64,
    alpha: usize,
) -> Result<AmplitudeProfile> {
    require_two_port(table)?;
    require_positive_reference(c)?;
    if !(1..=2).contains(&alpha) {
        return Err(Error::IndexOutOfRange(format!(
            "port must be 1 or 2, got {alpha}"
        )));
    }
    let a = alpha - 1;
    let n = table.grid().len();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let radicand = table.density(a, i, 0, i)? + table.density(a, i, 1, i)?;
        if radicand < -tol::RADICAND_TOL {
            return Err(Error::InconsistentTable(format!(
                "negative modulus-squared {radicand:.3e} at position {i}"
            )));
        }
        values.push(radicand.max(0.0).sqrt() / c);
    }
    Ok(AmplitudeProfile::new(table.grid(), values))
}

/// Reconstruct cos[φ(x_i) − φ(x_j)], reading the detector at port α = 1.
pub fn reconstruct_cos_phase(
    table: &OutcomeTable,
    amplitude: &AmplitudeProfile,
    c: f64,
    statistics: ParticleStatistics,
) -> Result<CosPhaseMatrix> {
    reconstruct_cos_phase_for(table, amplitude, c, statistics, 1)
}

/// Reconstruct cos[φ(x_i) − φ(x_j)] = ±Σ_β (−1)^{α−β} p_{α,β}(x_i,x_j) /
/// (c²·|ψ(x_i)|·|ψ(x_j)|), masked where either amplitude is below the
/// threshold [`tol::AMPLITUDE_MASK_FACTOR`]·max(amplitude). The overall
/// sign is the exchange statistics sign.
pub fn reconstruct_cos_phase_for(
    table: &OutcomeTable,
    amplitude: &AmplitudeProfile,
    c: f64,
    statistics: ParticleStatistics,
    alpha: usize,
) -> Result<CosPhaseMatrix> {
    require_two_port(table)?;
    require_positive_reference(c)?;
    if table.grid() != amplitude.grid() {
        return Err(Error::GridMismatch(
            "amplitude profile and table live on different grids".into(),
        ));
    }
    if !(1..=2).contains(&alpha) {
        return Err(Error::IndexOutOfRange(format!(
            "port must be 1 or 2, got {alpha}"
        )));
    }
    let a = alpha - 1;
    let n = table.grid().len();
    let threshold = tol::AMPLITUDE_MASK_FACTOR * amplitude.max();
    let sign = statistics.sign();

    let oriented = |i: usize, j: usize| -> Result<f64> {
        let mut acc = 0.0;
        for b in 0..2usize {
            let parity = if a == b { 1.0 } else { -1.0 };
            acc += parity * table.density(a, i, b, j)?;
        }
        Ok(sign * acc / (c * c * amplitude.value(i) * amplitude.value(j)))
    };

    let mut values = DMatrix::zeros(n, n);
    let mut masked = DMatrix::from_element(n, n, false);
    for i in 0..n {
        for j in i..n {
            if amplitude.value(i) <= threshold || amplitude.value(j) <= threshold {
                masked[(i, j)] = true;
                masked[(j, i)] = true;
                continue;
            }
            let value = 0.5 * (oriented(i, j)? + oriented(j, i)?);
            if value.abs() > 1.0 + tol::COS_RANGE_TOL {
                return Err(Error::InconsistentTable(format!(
                    "cos value {value} at ({i}, {j}) outside [-1, 1]"
                )));
            }
            let clamped = value.clamp(-1.0, 1.0);
            values[(i, j)] = clamped;
            values[(j, i)] = clamped;
        }
    }
    Ok(CosPhaseMatrix::new(table.grid(), values, masked))
}

/// Recover the conjugate pair of candidate states from an amplitude
/// profile and a cos-phase matrix, at the default consistency tolerance
/// [`tol::PHASE_CONSISTENCY_TOL`] (appropriate for noiseless tables).
pub fn pure_candidates(
    amplitude: &AmplitudeProfile,
    cos_matrix: &CosPhaseMatrix,
) -> Result<PureCandidates> {
    pure_candidates_with_tol(amplitude, cos_matrix, tol::PHASE_CONSISTENCY_TOL)
}

/// Recover the conjugate candidate pair, accepting a branch-sign assignment
/// whose worst cos residual is below `consistency_tol`.
pub fn pure_candidates_with_tol(
    amplitude: &AmplitudeProfile,
    cos_matrix: &CosPhaseMatrix,
    consistency_tol: f64,
) -> Result<PureCandidates> {
    if amplitude.grid() != cos_matrix.grid() {
        return Err(Error::GridMismatch(
            "amplitude profile and cos matrix live on different grids".into(),
        ));
    }
    let n = amplitude.grid().len();
    let usable: Vec<usize> = (0..n).filter(|&i| !cos_matrix.is_masked(i, i)).collect();
    let anchor = usable
        .iter()
        .copied()
        .max_by(|&a, &b| amplitude.value(a).total_cmp(&amplitude.value(b)))
        .ok_or_else(|| Error::Reconstruction("no usable amplitudes to anchor a phase".into()))?;

    // Angle of each point relative to the anchor, in [0, π]. The anchor is
    // pinned to exactly zero, and cos values within rounding of ±1 are
    // snapped before arccos, which would otherwise turn an ulp into a √ulp
    // phase error.
    let mut theta = vec![0.0f64; n];
    for &i in &usable {
        if i != anchor {
            theta[i] = snapped_acos(cos_matrix.value(i, anchor));
        }
    }

    // Points whose branch sign matters at working precision.
    let nodes: Vec<usize> = usable
        .iter()
        .copied()
        .filter(|&i| i != anchor && theta[i].sin() > SIN_NODE_FLOOR)
        .collect();

    // Pairwise votes: cos(φ_i − φ_j) = cosθ_i·cosθ_j + s_i·s_j·sinθ_i·sinθ_j,
    // so the measured residual against the cosθ·cosθ part fixes s_i·s_j.
    let vote = |i: usize, j: usize| -> Option<f64> {
        let w = theta[i].sin() * theta[j].sin();
        if w < VOTE_WEIGHT_FLOOR {
            return None;
        }
        let t = cos_matrix.value(i, j) - theta[i].cos() * theta[j].cos();
        if t.abs() < 0.5 * w {
            return None;
        }
        Some(t.signum())
    };

    let mut sign = vec![0.0f64; n];
    let mut components = 0usize;
    let mut order: Vec<usize> = nodes.clone();
    order.sort_by(|&a, &b| theta[b].sin().total_cmp(&theta[a].sin()));
    for &root in &order {
        if sign[root] != 0.0 {
            continue;
        }
        components += 1;
        sign[root] = 1.0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for &j in &nodes {
                if sign[j] == 0.0 {
                    if let Some(rel) = vote(i, j) {
                        sign[j] = sign[i] * rel;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    let sign_ambiguous =
        components > 1 || (nodes.is_empty() && usable.len() > 1);

    let mut amplitudes = vec![Complex64::ZERO; n];
    for i in 0..n {
        let phi = if sign[i] != 0.0 {
            sign[i] * theta[i]
        } else {
            theta[i]
        };
        amplitudes[i] = Complex64::from_polar(amplitude.value(i), phi);
    }
    let primary = WaveFunction::new(amplitude.grid(), amplitudes)?;

    let mut residual = 0.0f64;
    for &i in &usable {
        for &j in &usable {
            if cos_matrix.is_masked(i, j) {
                continue;
            }
            let phi_i = primary.amplitude(i).arg();
            let phi_j = primary.amplitude(j).arg();
            residual = residual.max(((phi_i - phi_j).cos() - cos_matrix.value(i, j)).abs());
        }
    }
    if residual > consistency_tol {
        return Err(Error::Reconstruction(format!(
            "no branch-sign assignment satisfies the cos matrix: residual {residual:.3e} \
             exceeds {consistency_tol:.3e}"
        )));
    }

    let conjugate = primary.conjugate();
    Ok(PureCandidates {
        primary,
        conjugate,
        sign_ambiguous,
    })
}

fn snapped_acos(value: f64) -> f64 {
    if value >= 1.0 - tol::COS_SNAP_TOL {
        0.0
    } else if value <= -1.0 + tol::COS_SNAP_TOL {
        std::f64::consts::PI
    } else {
        value.clamp(-1.0, 1.0).acos()
    }
}

fn require_two_port(table: &OutcomeTable) -> Result<()> {
    if table.mode_count() != 2 {
        return Err(Error::InvalidMatrix(format!(
            "pure-state reconstruction expects a two-port table, got {} modes",
            table.mode_count()
        )));
    }
    Ok(())
}

fn require_positive_reference(c: f64) -> Result<()> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidState(format!(
            "reference amplitude must be positive, got {c}"
        )));
    }
    Ok(())
}
