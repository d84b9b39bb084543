//! Mixed-state reconstruction: linear inversion through the exchange
//! products of a two-port setup, and the closed-form combinations of the
//! four-mode polarization network.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec;
use crate::interferometer::OutcomeTable;
use crate::optics::{exchange_products, TransferMatrix};
use crate::state::ParticleStatistics;
use crate::tomography::RhoEstimate;

/// Relative singular-value cutoff for the per-pair linear system.
const RANK_TOL: f64 = 1e-10;
/// How close the projection of a unit component vector onto the row space
/// must be to 1 for the component to count as exposed.
const EXPOSURE_TOL: f64 = 1e-6;

/// Invert a flat-reference two-port table through the probability model
///
/// p_{αβ}(x_i, x_j) = c²·[|U_{β1}U_{α2}|²·ρ(j,j) + |U_{β2}U_{α1}|²·ρ(i,i)
///                        + 2·(±1)·Re(K_{αβ}·ρ(j,i))],
///
/// solving the four-outcome linear system per position pair for the
/// diagonal entries and for whichever components of ρ(i,j) the exchange
/// products expose. For a unitary U only Re ρ is exposed and the estimate
/// reports the imaginary component as absent; the engineered-loss matrix at
/// η = √2 − 1 exposes both from a single table.
pub fn reconstruct_rho_general(
    table: &OutcomeTable,
    u: &TransferMatrix,
    c: f64,
    statistics: ParticleStatistics,
) -> Result<RhoEstimate> {
    if table.mode_count() != 2 || u.mode_count() != 2 {
        return Err(Error::InvalidMatrix(
            "general reconstruction expects a two-port table and matrix".into(),
        ));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidState(format!(
            "reference amplitude must be positive, got {c}"
        )));
    }
    let n = table.grid().len();
    let s = statistics.sign();
    let k = exchange_products(u)?;
    let c2 = c * c;

    // (α, β) in 0-based row order (1,1), (2,2), (1,2), (2,1).
    let ports: [(usize, usize); 4] = [(0, 0), (1, 1), (0, 1), (1, 0)];
    let coeff = |a: usize, b: usize| -> (f64, f64, Complex64) {
        let big_a = u.entry(b, 0).norm_sqr() * u.entry(a, 1).norm_sqr();
        let big_b = u.entry(b, 1).norm_sqr() * u.entry(a, 0).norm_sqr();
        (big_a, big_b, k.at(a + 1, b + 1))
    };

    let mut system = DMatrix::zeros(4, 4);
    for (row, &(a, b)) in ports.iter().enumerate() {
        let (big_a, big_b, kab) = coeff(a, b);
        system[(row, 0)] = c2 * big_b;
        system[(row, 1)] = c2 * big_a;
        system[(row, 2)] = c2 * 2.0 * s * kab.re;
        system[(row, 3)] = c2 * 2.0 * s * kab.im;
    }
    let svd = system.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, &v| m.max(v));
    if sigma_max <= 0.0 {
        return Err(Error::Reconstruction(
            "the outcome model is identically zero".into(),
        ));
    }
    let cutoff = sigma_max * RANK_TOL;
    let v_t = svd.v_t.as_ref().expect("svd computed with vectors");
    let kept: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > cutoff)
        .map(|(idx, _)| idx)
        .collect();
    let exposed = |component: usize| -> bool {
        let coords: f64 = kept.iter().map(|&r| v_t[(r, component)].powi(2)).sum();
        coords > 1.0 - EXPOSURE_TOL
    };
    let re_exposed = exposed(2);
    let im_exposed = exposed(3);
    let pinv = svd
        .pseudo_inverse(cutoff)
        .map_err(|e| Error::Reconstruction(format!("pseudo-inverse failed: {e}")))?;

    // Diagonal entries from the three distinct same-position cells.
    let diag_cells: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];
    let diag_coeffs: Vec<f64> = diag_cells
        .iter()
        .map(|&(a, b)| {
            let (big_a, big_b, kab) = coeff(a, b);
            c2 * (big_a + big_b + 2.0 * s * kab.re)
        })
        .collect();
    let diag_denominator: f64 = diag_coeffs.iter().map(|d| d * d).sum();
    if diag_denominator < 1e-30 {
        return Err(Error::Reconstruction(
            "diagonal entries are not recoverable from this setup".into(),
        ));
    }

    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = 0.0;
        for (cell, d) in diag_cells.iter().zip(&diag_coeffs) {
            acc += d * table.density(cell.0, i, cell.1, i)?;
        }
        diag.push(acc / diag_denominator);
    }

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let rhs_for = |&(i, j): &(usize, usize)| -> Result<DVector<f64>> {
        let mut rhs = DVector::zeros(4);
        for (row, &(a, b)) in ports.iter().enumerate() {
            rhs[row] = table.density(a, i, b, j)?;
        }
        Ok(rhs)
    };
    let solved: Vec<Result<(f64, f64)>> = exec::map_ordered(&pairs, |pair| {
        let rhs = rhs_for(pair)?;
        let x = &pinv * rhs;
        Ok((x[2], x[3]))
    });

    let mut re = DMatrix::zeros(n, n);
    let mut im = DMatrix::zeros(n, n);
    for (i, &v) in diag.iter().enumerate() {
        re[(i, i)] = v;
    }
    for (&(i, j), solution) in pairs.iter().zip(solved) {
        let (re_ij, im_ij) = solution?;
        if re_exposed {
            re[(i, j)] = re_ij;
            re[(j, i)] = re_ij;
        }
        if im_exposed {
            im[(i, j)] = im_ij;
            im[(j, i)] = -im_ij;
        }
    }
    Ok(RhoEstimate::from_components(
        table.grid(),
        re,
        im,
        re_exposed,
        im_exposed,
    ))
}

/// How the polarization outputs are read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorVariant {
    /// Polarizing beam splitters with detectors on all four outputs:
    /// (c²/4)·ρ(i,j) = p_{1h,1h} − p_{1h,2h} − i·p_{1h,1v} + i·p_{1h,2v}.
    FourDetector,
    /// Polarizer plus detector per port; the last density is unavailable
    /// but three suffice:
    /// (c²/4)·ρ(i,j) = (1−i)·p_{1h,1h} − (1+i)·p_{1h,2h} + 2i·p_{1h,2v}.
    ThreeDetector,
}

/// Which of the four label-swapped density sets to read. All four carry the
/// same tomographic information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizedSet {
    /// Densities p_{1h,·} (the default).
    P1h,
    /// h ↔ v swapped: densities p_{1v,·}.
    P1v,
    /// Ports 1 ↔ 2 swapped: densities p_{2h,·}.
    P2h,
    /// Both swaps: densities p_{2v,·}.
    P2v,
}

impl PolarizedSet {
    /// Output modes playing the reference, −Re, −Im, and +Im roles for this
    /// set. The Re partner is always the port swap of the reference; which
    /// polarization swap carries +Im flips between the h- and v-referenced
    /// sets because the swap conjugates the circular input mode.
    fn roles(self) -> [usize; 4] {
        match self {
            PolarizedSet::P1h => [0, 2, 1, 3],
            PolarizedSet::P1v => [1, 3, 2, 0],
            PolarizedSet::P2h => [2, 0, 3, 1],
            PolarizedSet::P2v => [3, 1, 0, 2],
        }
    }
}

/// Invert a polarization-network table via the default p_{1h,·} set.
pub fn reconstruct_rho_polarized(
    table: &OutcomeTable,
    c: f64,
    variant: DetectorVariant,
) -> Result<RhoEstimate> {
    reconstruct_rho_polarized_from_set(table, c, variant, PolarizedSet::P1h)
}

/// Invert a polarization-network table using one of the four equivalent
/// density sets. Every matrix element comes from the stated closed-form
/// combination of three or four densities; diagonal entries use the same
/// combination at i = j with the double-counting divisor undone.
pub fn reconstruct_rho_polarized_from_set(
    table: &OutcomeTable,
    c: f64,
    variant: DetectorVariant,
    set: PolarizedSet,
) -> Result<RhoEstimate> {
    if table.mode_count() != 4 {
        return Err(Error::InvalidMatrix(format!(
            "polarized reconstruction expects a four-mode table, got {} modes",
            table.mode_count()
        )));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidState(format!(
            "reference amplitude must be positive, got {c}"
        )));
    }
    let n = table.grid().len();
    let s = table.statistics().sign();
    let scale = 4.0 * s / (c * c);
    let [m_ref, m_re_minus, m_im_minus, m_im_plus] = set.roles();

    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .collect();
    let combos: Vec<Result<Complex64>> = exec::map_ordered(&cells, |&(i, j)| {
        let p_ref = table.density(m_ref, i, m_ref, j)?;
        let p_re_minus = table.density(m_ref, i, m_re_minus, j)?;
        let p_im_plus = table.density(m_ref, i, m_im_plus, j)?;
        let combo = match variant {
            DetectorVariant::FourDetector => {
                let p_im_minus = table.density(m_ref, i, m_im_minus, j)?;
                Complex64::new(p_ref - p_re_minus, p_im_plus - p_im_minus)
            }
            DetectorVariant::ThreeDetector => {
                Complex64::new(p_ref - p_re_minus, 2.0 * p_im_plus - p_ref - p_re_minus)
            }
        };
        Ok(combo * scale)
    });

    let mut re = DMatrix::zeros(n, n);
    let mut im = DMatrix::zeros(n, n);
    for (&(i, j), combo) in cells.iter().zip(combos) {
        let value = combo?;
        re[(i, j)] = value.re;
        im[(i, j)] = value.im;
    }
    Ok(RhoEstimate::from_components(table.grid(), re, im, true, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensityMatrix;
    use crate::grid::Grid;
    use crate::interferometer::{
        joint_probabilities_mixed, joint_probabilities_polarized, Detection, OutcomeKey,
        OutcomeTable,
    };
    use crate::optics::{
        balanced_splitter, haar_random_unitary, imaginary_access_eta, lossy_tomography_matrix,
    };
    use crate::state::WaveFunction;
    use crate::tomography::assemble_density;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Grid {
        Grid::new(n, 0.0, n as f64).unwrap()
    }

    fn flat_c(n: usize) -> f64 {
        1.0 / (n as f64).sqrt()
    }

    #[test]
    fn balanced_splitter_recovers_re() {
        let g = grid(6);
        let c = flat_c(6);
        let flat = WaveFunction::flat(g);
        let rho = DensityMatrix::random(g, 4, 3).unwrap();
        for s in [ParticleStatistics::Boson, ParticleStatistics::Fermion] {
            let t = joint_probabilities_mixed(&balanced_splitter(), &rho, &flat, s).unwrap();
            let est = reconstruct_rho_general(&t, &balanced_splitter(), c, s).unwrap();
            assert!(est.re_present());
            assert!(!est.im_present());
            assert_eq!(est.missing_components(), vec!["im"]);
            for i in 0..6 {
                for j in 0..6 {
                    let expected = if i == j {
                        rho.get(i, i).re
                    } else {
                        rho.get(i, j).re
                    };
                    assert_abs_diff_eq!(est.re()[(i, j)], expected, epsilon = 1e-10);
                }
            }
            // the direct difference formula agrees with the solver
            for i in 0..6 {
                for j in 0..6 {
                    if i != j {
                        let direct = s.sign()
                            * (t.density(0, i, 0, j).unwrap() - t.density(0, i, 1, j).unwrap())
                            / (c * c);
                        assert_abs_diff_eq!(est.re()[(i, j)], direct, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn unitary_tables_never_expose_im() {
        let g = grid(5);
        let c = flat_c(5);
        let flat = WaveFunction::flat(g);
        let rho = DensityMatrix::random(g, 3, 11).unwrap();
        for seed in 0..5u64 {
            let u = haar_random_unitary(2, 600 + seed).unwrap();
            let t =
                joint_probabilities_mixed(&u, &rho, &flat, ParticleStatistics::Boson).unwrap();
            let est = reconstruct_rho_general(&t, &u, c, ParticleStatistics::Boson).unwrap();
            assert!(!est.im_present(), "seed {seed}");
        }
    }

    #[test]
    fn lossy_setup_recovers_both_components() {
        let g = grid(6);
        let c = flat_c(6);
        let flat = WaveFunction::flat(g);
        let u = lossy_tomography_matrix(imaginary_access_eta()).unwrap();
        let kappa = (1.0 - std::f64::consts::SQRT_2 / 2.0).powi(2);
        for s in [ParticleStatistics::Boson, ParticleStatistics::Fermion] {
            let rho = DensityMatrix::random(g, 5, 17).unwrap();
            let t = joint_probabilities_mixed(&u, &rho, &flat, s).unwrap();
            let est = reconstruct_rho_general(&t, &u, c, s).unwrap();
            assert!(est.re_present() && est.im_present());
            assert!(est.missing_components().is_empty());
            assert!(est.max_entry_error(&rho) < 1e-10);
            // coincidence-difference formula for Im
            for i in 0..6 {
                for j in 0..6 {
                    if i != j {
                        let direct = s.sign()
                            * (t.density(1, i, 0, j).unwrap() - t.density(0, i, 1, j).unwrap())
                            / (4.0 * c * c * kappa);
                        assert_abs_diff_eq!(est.im()[(i, j)], direct, epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn lossless_composite_matches_balanced_route() {
        let g = grid(5);
        let c = flat_c(5);
        let flat = WaveFunction::flat(g);
        let rho = DensityMatrix::random(g, 2, 23).unwrap();
        let s = ParticleStatistics::Boson;
        let composite = lossy_tomography_matrix(1.0).unwrap();
        let t_comp = joint_probabilities_mixed(&composite, &rho, &flat, s).unwrap();
        let est_comp = reconstruct_rho_general(&t_comp, &composite, c, s).unwrap();
        let t_bal = joint_probabilities_mixed(&balanced_splitter(), &rho, &flat, s).unwrap();
        let est_bal = reconstruct_rho_general(&t_bal, &balanced_splitter(), c, s).unwrap();
        assert!(!est_comp.im_present());
        for i in 0..5 {
            for j in 0..5 {
                assert_abs_diff_eq!(
                    est_comp.re()[(i, j)],
                    est_bal.re()[(i, j)],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn polarized_roundtrip_both_variants() {
        let g = grid(8);
        let c = flat_c(8);
        for s in [ParticleStatistics::Boson, ParticleStatistics::Fermion] {
            for rank in [1usize, 3, 8] {
                let rho = DensityMatrix::random(g, rank, 31 + rank as u64).unwrap();
                let t = joint_probabilities_polarized(&rho, s).unwrap();
                let four =
                    reconstruct_rho_polarized(&t, c, DetectorVariant::FourDetector).unwrap();
                let three =
                    reconstruct_rho_polarized(&t, c, DetectorVariant::ThreeDetector).unwrap();
                assert!(four.max_entry_error(&rho) < 1e-10);
                assert!(three.max_entry_error(&rho) < 1e-10);
                for i in 0..8 {
                    for j in 0..8 {
                        let f = Complex64::new(four.re()[(i, j)], four.im()[(i, j)]);
                        let th = Complex64::new(three.re()[(i, j)], three.im()[(i, j)]);
                        assert!((f - th).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn polarized_sets_agree() {
        let g = grid(6);
        let c = flat_c(6);
        let rho = DensityMatrix::random(g, 4, 47).unwrap();
        let t = joint_probabilities_polarized(&rho, ParticleStatistics::Boson).unwrap();
        let base =
            reconstruct_rho_polarized(&t, c, DetectorVariant::FourDetector).unwrap();
        for set in [PolarizedSet::P1v, PolarizedSet::P2h, PolarizedSet::P2v] {
            let other = reconstruct_rho_polarized_from_set(
                &t,
                c,
                DetectorVariant::FourDetector,
                set,
            )
            .unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    assert_abs_diff_eq!(
                        base.re()[(i, j)],
                        other.re()[(i, j)],
                        epsilon = 1e-12
                    );
                    assert_abs_diff_eq!(
                        base.im()[(i, j)],
                        other.im()[(i, j)],
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn polarized_maximally_mixed_off_diagonals_vanish() {
        let g = grid(5);
        let c = flat_c(5);
        let rho = DensityMatrix::maximally_mixed(g);
        let t = joint_probabilities_polarized(&rho, ParticleStatistics::Boson).unwrap();
        for variant in [DetectorVariant::FourDetector, DetectorVariant::ThreeDetector] {
            let est = reconstruct_rho_polarized(&t, c, variant).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    if i != j {
                        assert!(est.re()[(i, j)].abs() < 1e-12);
                        assert!(est.im()[(i, j)].abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn missing_rows_are_named() {
        let g = grid(4);
        let c = flat_c(4);
        let rho = DensityMatrix::random(g, 2, 53).unwrap();
        let t = joint_probabilities_polarized(&rho, ParticleStatistics::Boson).unwrap();
        let mut probabilities: std::collections::BTreeMap<_, _> =
            t.iter().map(|(k, &p)| (*k, p)).collect();
        probabilities.remove(&OutcomeKey::new(
            Detection { mode: 0, pos: 0 },
            Detection { mode: 2, pos: 1 },
        ));
        let partial = OutcomeTable::from_parts(
            t.grid(),
            t.statistics(),
            t.setup().to_string(),
            t.output_labels().to_vec(),
            probabilities,
        )
        .unwrap();
        let err = reconstruct_rho_polarized(&partial, c, DetectorVariant::FourDetector)
            .unwrap_err();
        match err {
            Error::MissingOutcome(msg) => {
                assert!(msg.contains("1h"), "message was: {msg}");
                assert!(msg.contains("2h"), "message was: {msg}");
            }
            other => panic!("expected MissingOutcome, got {other:?}"),
        }
    }

    #[test]
    fn combined_re_im_assembly() {
        let g = grid(6);
        let c = flat_c(6);
        let flat = WaveFunction::flat(g);
        let s = ParticleStatistics::Boson;
        let rho = DensityMatrix::random(g, 4, 61).unwrap();
        let t_re = joint_probabilities_mixed(&balanced_splitter(), &rho, &flat, s).unwrap();
        let est_re = reconstruct_rho_general(&t_re, &balanced_splitter(), c, s).unwrap();
        let lossy = lossy_tomography_matrix(imaginary_access_eta()).unwrap();
        let t_im = joint_probabilities_mixed(&lossy, &rho, &flat, s).unwrap();
        let est_im = reconstruct_rho_general(&t_im, &lossy, c, s).unwrap();
        let combined = assemble_density(g, est_re.re(), est_im.im(), true).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((combined.rho.get(i, j) - rho.get(i, j)).norm() < 1e-10);
            }
        }
        // the single-setup route agrees with the combined route
        let single = est_im.to_density(true).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((combined.rho.get(i, j) - single.rho.get(i, j)).norm() < 1e-10);
            }
        }
    }
}
