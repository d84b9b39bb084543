//! Forward simulation: from (unknown state, reference, transfer matrix,
//! statistics) to the table of exclusive two-particle detection outcomes.
//!
//! A detection outcome is an unordered pair of (output mode, grid position)
//! detections. Tables store each physical event once, under the ordered key
//! with `first ≤ second`; same-mode same-position outcomes carry the
//! double-counting divisor (1 + δ_{αβ}δ_{ij}) so the exclusive sum is
//! exactly 1 for unitary setups. Lossy setups sum below 1 and the deficit
//! is accounted as a "discarded" pseudo-outcome at sampling time, never by
//! renormalizing, because the loss-scheme inversion formulas need raw
//! magnitudes.
//!
//! Two independent forward routes exist on purpose: the closed-form
//! per-outcome evaluation here, and the single-particle evolution route in
//! [`reference`]; tests hold them against each other.

pub mod reference;
mod sampling;

pub use sampling::{empirical_table, sample_counts, CountTable};

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::Grid;
use crate::modes::ModeLabel;
use crate::optics::{polarization_network, TransferMatrix};
use crate::state::{ParticleStatistics, WaveFunction};
use crate::tol;

/// One detection: an output mode index and a grid position index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Detection {
    pub mode: usize,
    pub pos: usize,
}

/// Ordered exclusive outcome key with `first ≤ second` lexicographically in
/// (mode, position).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct OutcomeKey {
    first: Detection,
    second: Detection,
}

impl OutcomeKey {
    /// Canonicalize an unordered pair of detections.
    pub fn new(a: Detection, b: Detection) -> Self {
        if a <= b {
            Self { first: a, second: b }
        } else {
            Self { first: b, second: a }
        }
    }

    pub fn first(&self) -> Detection {
        self.first
    }

    pub fn second(&self) -> Detection {
        self.second
    }

    /// Both particles in the same mode at the same position.
    pub fn is_diagonal(&self) -> bool {
        self.first == self.second
    }
}

/// Probabilities over the exclusive two-particle outcomes of one setup.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    grid: Grid,
    statistics: ParticleStatistics,
    setup: String,
    output_labels: Vec<ModeLabel>,
    probabilities: BTreeMap<OutcomeKey, f64>,
}

impl OutcomeTable {
    /// Assemble a table from parts, validating key ranges and clamping
    /// rounding-level negative probabilities to zero.
    pub fn from_parts(
        grid: Grid,
        statistics: ParticleStatistics,
        setup: String,
        output_labels: Vec<ModeLabel>,
        probabilities: BTreeMap<OutcomeKey, f64>,
    ) -> Result<Self> {
        let m = output_labels.len();
        if m != 2 && m != 4 {
            return Err(Error::InvalidMatrix(format!(
                "tables need 2 or 4 output modes, got {m}"
            )));
        }
        let n = grid.len();
        let mut clamped = BTreeMap::new();
        for (key, p) in probabilities {
            for d in [key.first, key.second] {
                if d.mode >= m || d.pos >= n {
                    return Err(Error::IndexOutOfRange(format!(
                        "detection (mode {}, pos {}) outside {m} modes x {n} positions",
                        d.mode, d.pos
                    )));
                }
            }
            if !p.is_finite() || p < -tol::PROB_NEGATIVE_TOL {
                return Err(Error::InconsistentTable(format!(
                    "probability {p} at {key:?}"
                )));
            }
            clamped.insert(key, p.max(0.0));
        }
        Ok(Self {
            grid,
            statistics,
            setup,
            output_labels,
            probabilities: clamped,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn statistics(&self) -> ParticleStatistics {
        self.statistics
    }

    /// Short descriptor of the setup that produced the table.
    pub fn setup(&self) -> &str {
        &self.setup
    }

    pub fn output_labels(&self) -> &[ModeLabel] {
        &self.output_labels
    }

    pub fn mode_count(&self) -> usize {
        self.output_labels.len()
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Stored probability of an exclusive outcome.
    pub fn probability(&self, key: &OutcomeKey) -> Option<f64> {
        self.probabilities.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OutcomeKey, &f64)> {
        self.probabilities.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &OutcomeKey> {
        self.probabilities.keys()
    }

    /// Formula-level density p_{ab}(x_i, x_j) for 0-based output modes:
    /// the stored exclusive probability with the diagonal double-counting
    /// divisor undone.
    pub fn density(&self, mode_a: usize, i: usize, mode_b: usize, j: usize) -> Result<f64> {
        let m = self.mode_count();
        let n = self.grid.len();
        if mode_a >= m || mode_b >= m || i >= n || j >= n {
            return Err(Error::IndexOutOfRange(format!(
                "outcome ({mode_a},{i}),({mode_b},{j}) outside {m} modes x {n} positions"
            )));
        }
        let key = OutcomeKey::new(
            Detection { mode: mode_a, pos: i },
            Detection { mode: mode_b, pos: j },
        );
        let p = self.probability(&key).ok_or_else(|| {
            Error::MissingOutcome(format!(
                "outcome ({},{}),({},{}) absent from table",
                self.output_labels[key.first.mode], key.first.pos,
                self.output_labels[key.second.mode], key.second.pos
            ))
        })?;
        Ok(if key.is_diagonal() { 2.0 * p } else { p })
    }

    /// Sum over the ordered exclusive outcome set. 1 within 1e-9 for
    /// unitary setups and normalized inputs; at most 1 for lossy setups.
    pub fn total_probability(&self) -> f64 {
        self.probabilities.values().sum()
    }

    /// Largest probability among coincidence outcomes (distinct output
    /// ports).
    pub fn max_coincidence_probability(&self) -> f64 {
        self.probabilities
            .iter()
            .filter(|(k, _)| {
                self.output_labels[k.first.mode].port != self.output_labels[k.second.mode].port
            })
            .fold(0.0f64, |acc, (_, &p)| acc.max(p))
    }
}

/// Sum over the ordered exclusive outcome set of `table`.
pub fn total_probability(table: &OutcomeTable) -> f64 {
    table.total_probability()
}

/// The two coefficients of the single-particle detection state
/// a·|x_j⟩ + b·|x_i⟩ for detections at (port α, x_i) and (port β, x_j):
/// a = U*_{β1}·U*_{α2}·ψ*_r(x_i) and b = ±U*_{β2}·U*_{α1}·ψ*_r(x_j), with
/// the statistics sign folded into b. The joint amplitude is
/// conj(a)·ψ_u(x_j) + conj(b)·ψ_u(x_i).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionCoefficients {
    pub a: Complex64,
    pub b: Complex64,
}

/// Detection-state coefficients for a two-port setup; `alpha` and `beta`
/// are 1-based ports, `i` and `j` grid indices.
pub fn detection_coefficients(
    u: &TransferMatrix,
    psi_r: &WaveFunction,
    alpha: usize,
    beta: usize,
    i: usize,
    j: usize,
    statistics: ParticleStatistics,
) -> Result<DetectionCoefficients> {
    if u.mode_count() != 2 {
        return Err(Error::InvalidMatrix(
            "detection coefficients are defined for two-port setups".into(),
        ));
    }
    let n = psi_r.len();
    if !(1..=2).contains(&alpha) || !(1..=2).contains(&beta) || i >= n || j >= n {
        return Err(Error::IndexOutOfRange(format!(
            "ports must be 1..=2 and positions < {n}: alpha={alpha} beta={beta} i={i} j={j}"
        )));
    }
    let (am, bm) = (alpha - 1, beta - 1);
    let a = u.entry(bm, 0).conj() * u.entry(am, 1).conj() * psi_r.amplitude(i).conj();
    let b = statistics.sign()
        * u.entry(bm, 1).conj()
        * u.entry(am, 0).conj()
        * psi_r.amplitude(j).conj();
    Ok(DetectionCoefficients { a, b })
}

enum UnknownInput<'a> {
    Pure(&'a WaveFunction),
    Mixed(&'a DensityMatrix),
}

/// Closed-form forward simulation, generic over the input-mode assignment:
/// the unknown particle enters mode `u_in`, the reference enters mode `r_in`.
fn simulate_closed_form(
    u: &TransferMatrix,
    unknown: &UnknownInput,
    psi_r: &WaveFunction,
    u_in: usize,
    r_in: usize,
    statistics: ParticleStatistics,
    setup: &str,
) -> Result<OutcomeTable> {
    let grid = psi_r.grid();
    let unknown_grid = match unknown {
        UnknownInput::Pure(psi) => psi.grid(),
        UnknownInput::Mixed(rho) => rho.grid(),
    };
    if unknown_grid != grid {
        return Err(Error::GridMismatch(
            "unknown state and reference live on different grids".into(),
        ));
    }
    if !psi_r.is_normalized(tol::INPUT_NORM_TOL) {
        return Err(Error::InvalidState(format!(
            "reference is not normalized: |psi|^2 = {}",
            psi_r.norm_sqr()
        )));
    }
    if let UnknownInput::Pure(psi) = unknown {
        if !psi.is_normalized(tol::INPUT_NORM_TOL) {
            return Err(Error::InvalidState(format!(
                "unknown state is not normalized: |psi|^2 = {}",
                psi.norm_sqr()
            )));
        }
    }
    let m = u.mode_count();
    if u_in >= m || r_in >= m || u_in == r_in {
        return Err(Error::IndexOutOfRange(format!(
            "input modes {u_in}, {r_in} invalid for m={m}"
        )));
    }

    let keys = outcome_keys(m, grid.len());
    let s = statistics.sign();
    let values = exec::map_ordered(&keys, |key| {
        let (a, b) = (key.first, key.second);
        let divisor = if key.is_diagonal() { 2.0 } else { 1.0 };
        match unknown {
            UnknownInput::Pure(psi) => {
                let amp = u.entry(b.mode, u_in)
                    * u.entry(a.mode, r_in)
                    * psi_r.amplitude(a.pos)
                    * psi.amplitude(b.pos)
                    + s * u.entry(b.mode, r_in)
                        * u.entry(a.mode, u_in)
                        * psi_r.amplitude(b.pos)
                        * psi.amplitude(a.pos);
                amp.norm_sqr() / divisor
            }
            UnknownInput::Mixed(rho) => {
                let ca = u.entry(b.mode, u_in).conj()
                    * u.entry(a.mode, r_in).conj()
                    * psi_r.amplitude(a.pos).conj();
                let cb = s * u.entry(b.mode, r_in).conj()
                    * u.entry(a.mode, u_in).conj()
                    * psi_r.amplitude(b.pos).conj();
                let p = ca.norm_sqr() * rho.get(b.pos, b.pos).re
                    + cb.norm_sqr() * rho.get(a.pos, a.pos).re
                    + 2.0 * (ca.conj() * cb * rho.get(b.pos, a.pos)).re;
                p / divisor
            }
        }
    });

    let mut probabilities = BTreeMap::new();
    for (key, p) in keys.into_iter().zip(values) {
        if p < -tol::PROB_NEGATIVE_TOL {
            return Err(Error::NonPhysical(format!(
                "negative probability {p} at {key:?}"
            )));
        }
        probabilities.insert(key, p.max(0.0));
    }
    OutcomeTable::from_parts(
        grid,
        statistics,
        setup.to_string(),
        u.output_labels().to_vec(),
        probabilities,
    )
}

pub(crate) fn outcome_keys(m: usize, n: usize) -> Vec<OutcomeKey> {
    let mut keys = Vec::with_capacity(m * n * (m * n + 1) / 2);
    for am in 0..m {
        for ai in 0..n {
            let a = Detection { mode: am, pos: ai };
            for bm in am..m {
                let j0 = if bm == am { ai } else { 0 };
                for bj in j0..n {
                    keys.push(OutcomeKey {
                        first: a,
                        second: Detection { mode: bm, pos: bj },
                    });
                }
            }
        }
    }
    keys
}

/// Joint detection probabilities for a pure unknown state in port 1 and a
/// reference in port 2 of a two-port setup.
pub fn joint_probabilities_pure(
    u: &TransferMatrix,
    psi_u: &WaveFunction,
    psi_r: &WaveFunction,
    statistics: ParticleStatistics,
) -> Result<OutcomeTable> {
    require_two_port(u)?;
    simulate_closed_form(
        u,
        &UnknownInput::Pure(psi_u),
        psi_r,
        0,
        1,
        statistics,
        "two-port",
    )
}

/// Joint detection probabilities for a mixed unknown state; the density
/// matrix must be flagged physical.
pub fn joint_probabilities_mixed(
    u: &TransferMatrix,
    rho_u: &DensityMatrix,
    psi_r: &WaveFunction,
    statistics: ParticleStatistics,
) -> Result<OutcomeTable> {
    if !rho_u.is_physical() {
        return Err(Error::NonPhysical(
            "simulation requires a physical density matrix; \
             use joint_probabilities_mixed_raw to override"
                .into(),
        ));
    }
    joint_probabilities_mixed_raw(u, rho_u, psi_r, statistics)
}

/// Like [`joint_probabilities_mixed`] but accepts a raw (possibly
/// non-physical) density matrix. Outcomes must still form a probability
/// table; genuinely negative probabilities are rejected.
pub fn joint_probabilities_mixed_raw(
    u: &TransferMatrix,
    rho_u: &DensityMatrix,
    psi_r: &WaveFunction,
    statistics: ParticleStatistics,
) -> Result<OutcomeTable> {
    require_two_port(u)?;
    simulate_closed_form(
        u,
        &UnknownInput::Mixed(rho_u),
        psi_r,
        0,
        1,
        statistics,
        "two-port",
    )
}

/// Joint detection probabilities through the four-mode polarization
/// network: the unknown particle enters mode 1r, a flat reference enters
/// mode 2d, and the 1l / 2a modes stay in the vacuum. Outcomes range over
/// the output modes (1h, 1v, 2h, 2v).
pub fn joint_probabilities_polarized(
    rho_u: &DensityMatrix,
    statistics: ParticleStatistics,
) -> Result<OutcomeTable> {
    if !rho_u.is_physical() {
        return Err(Error::NonPhysical(
            "polarized simulation requires a physical density matrix".into(),
        ));
    }
    let u = polarization_network();
    let psi_r = WaveFunction::flat(rho_u.grid());
    simulate_closed_form(
        &u,
        &UnknownInput::Mixed(rho_u),
        &psi_r,
        0,
        2,
        statistics,
        "four-mode polarization",
    )
}

fn require_two_port(u: &TransferMatrix) -> Result<()> {
    if u.mode_count() != 2 {
        return Err(Error::InvalidMatrix(format!(
            "expected a two-port setup, got m={}",
            u.mode_count()
        )));
    }
    Ok(())
}
