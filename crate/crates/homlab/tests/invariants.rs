//! Property tests and sampled invariants that back the per-operation unit
//! tests: algebraic identities hold on arbitrary inputs, not just the
//! hand-picked ones.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use homlab::interferometer::{
    empirical_table, joint_probabilities_mixed, joint_probabilities_polarized,
    joint_probabilities_pure, sample_counts,
};
use homlab::optics::{
    balanced_splitter, brewster, compose, exchange_products, haar_random_unitary, quarter_wave,
    rotation, ElementKind, TransferMatrix,
};
use homlab::tomography::{reconstruct_rho_general, reconstruct_rho_polarized, DetectorVariant};
use homlab::{DensityMatrix, Grid, ParticleStatistics, WaveFunction};

fn grid(n: usize) -> Grid {
    Grid::new(n, 0.0, n as f64).unwrap()
}

fn element_strategy() -> impl Strategy<Value = ElementKind> {
    prop_oneof![
        Just(ElementKind::BalancedSplitter),
        (-10.0f64..10.0).prop_map(ElementKind::Rotation),
        Just(ElementKind::QuarterWave),
        (0.0f64..=1.0).prop_map(ElementKind::Brewster),
    ]
}

fn build(kind: ElementKind) -> TransferMatrix {
    homlab::optics::optical_element(kind).unwrap()
}

/// Arbitrary passive 2×2 matrix: entries small enough that the Frobenius
/// norm (an upper bound on the largest singular value) stays below 1.
fn passive_matrix_strategy() -> impl Strategy<Value = TransferMatrix> {
    proptest::collection::vec(-0.35f64..0.35, 8).prop_map(|v| {
        let entries = DMatrix::from_fn(2, 2, |i, j| {
            let idx = 2 * (2 * i + j);
            Complex64::new(v[idx], v[idx + 1])
        });
        TransferMatrix::with_canonical_labels(entries).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..12)) {
        let n = values.len();
        let amps: Vec<Complex64> = values.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        prop_assume!(norm > 1e-6);
        let state = WaveFunction::new(grid(n), amps).unwrap();
        let once = state.normalized().unwrap();
        let twice = once.normalized().unwrap();
        for i in 0..n {
            prop_assert!((once.amplitude(i) - twice.amplitude(i)).norm() < 1e-14);
        }
    }

    #[test]
    fn conjugation_is_an_involution(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..12)) {
        let n = values.len();
        let amps: Vec<Complex64> = values.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let state = WaveFunction::new(grid(n), amps).unwrap();
        prop_assert_eq!(state.conjugate().conjugate(), state);
    }

    #[test]
    fn compose_is_associative(a in element_strategy(), b in element_strategy(), c in element_strategy()) {
        let (a, b, c) = (build(a), build(b), build(c));
        let left = compose(&[a.clone(), compose(&[b.clone(), c.clone()]).unwrap()]).unwrap();
        let right = compose(&[compose(&[a, b]).unwrap(), c]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((left.entry(i, j) - right.entry(i, j)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn elements_and_compositions_stay_passive(kinds in proptest::collection::vec(element_strategy(), 1..5)) {
        let elements: Vec<TransferMatrix> = kinds.into_iter().map(build).collect();
        for e in &elements {
            prop_assert!(e.max_singular_value() <= 1.0 + 1e-12);
        }
        let chain = compose(&elements).unwrap();
        prop_assert!(chain.max_singular_value() <= 1.0 + 1e-12);
    }

    #[test]
    fn exchange_diagonal_is_exactly_real_nonnegative(u in passive_matrix_strategy()) {
        let k = exchange_products(&u).unwrap();
        for alpha in 1..=2usize {
            let z = k.at(alpha, alpha);
            prop_assert_eq!(z.im, 0.0);
            prop_assert!(z.re >= 0.0);
        }
    }

    #[test]
    fn lossy_family_is_passive(eta in 0.0f64..=1.0) {
        let u = homlab::optics::lossy_tomography_matrix(eta).unwrap();
        prop_assert!(u.max_singular_value() <= 1.0 + 1e-12);
    }
}

#[test]
fn random_density_properties_over_1000_seeds() {
    let g = grid(6);
    for seed in 0..1000u64 {
        let rank = 1 + (seed as usize) % 6;
        let rho = DensityMatrix::random(g, rank, seed).unwrap();
        assert!(rho.hermiticity_defect() <= 1e-12, "seed {seed}");
        assert!((rho.trace().re - 1.0).abs() <= 1e-12, "seed {seed}");
        assert!(rho.trace().im.abs() <= 1e-12, "seed {seed}");
        assert!(rho.min_eigenvalue() >= -1e-10, "seed {seed}");
    }
}

#[test]
fn conjugate_states_are_indistinguishable_in_lossless_setups() {
    let g = grid(6);
    // real-valued references, arbitrary unitaries; the flat-reference
    // balanced splitter is the case the tomography modules rely on
    let references = [
        WaveFunction::gaussian(g, 3.0, 1.1).unwrap(),
        WaveFunction::flat(g),
    ];
    for seed in 0..20u64 {
        let unitaries = [haar_random_unitary(2, 300 + seed).unwrap(), balanced_splitter()];
        let psi_u = WaveFunction::random(g, 400 + seed);
        for psi_r in &references {
            for u in &unitaries {
                for s in [ParticleStatistics::Boson, ParticleStatistics::Fermion] {
                    let t = joint_probabilities_pure(u, &psi_u, psi_r, s).unwrap();
                    let tc =
                        joint_probabilities_pure(u, &psi_u.conjugate(), psi_r, s).unwrap();
                    for (key, &p) in t.iter() {
                        assert!(
                            (tc.probability(key).unwrap() - p).abs() < 1e-12,
                            "seed {seed}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn mixed_simulation_matches_pure_on_projectors_100_seeds() {
    let g = grid(6);
    for seed in 0..100u64 {
        let psi_u = WaveFunction::random(g, 500 + seed);
        let psi_r = WaveFunction::random(g, 600 + seed);
        let rho = DensityMatrix::from_pure(&psi_u).unwrap();
        let u = haar_random_unitary(2, 700 + seed).unwrap();
        let s = if seed % 2 == 0 {
            ParticleStatistics::Boson
        } else {
            ParticleStatistics::Fermion
        };
        let pure = joint_probabilities_pure(&u, &psi_u, &psi_r, s).unwrap();
        let mixed = joint_probabilities_mixed(&u, &rho, &psi_r, s).unwrap();
        for (key, &p) in pure.iter() {
            assert!(
                (mixed.probability(key).unwrap() - p).abs() < 1e-13,
                "seed {seed}"
            );
        }
    }
}

#[test]
fn single_unitary_tables_never_determine_im_rho() {
    let g = grid(5);
    let c = WaveFunction::flat_amplitude(g);
    let flat = WaveFunction::flat(g);
    for seed in 0..20u64 {
        let u = haar_random_unitary(2, 800 + seed).unwrap();
        let rho = DensityMatrix::random(g, 1 + (seed as usize) % 5, 900 + seed).unwrap();
        let t = joint_probabilities_mixed(&u, &rho, &flat, ParticleStatistics::Boson).unwrap();
        let est = reconstruct_rho_general(&t, &u, c, ParticleStatistics::Boson).unwrap();
        assert!(!est.im_present(), "seed {seed} claimed Im access from a unitary");
        assert_eq!(est.missing_components(), vec!["im"], "seed {seed}");
    }
}

#[test]
fn sampled_reconstruction_converges_to_noiseless() {
    let g = grid(4);
    let c = WaveFunction::flat_amplitude(g);
    let ladder = [1_000u64, 10_000, 100_000];
    let mut medians = Vec::new();
    for (rung, &shots) in ladder.iter().enumerate() {
        let mut errors = Vec::new();
        for seed in 0..5u64 {
            let rho = DensityMatrix::random(g, 1 + (seed as usize) % 4, 1100 + seed).unwrap();
            let table = joint_probabilities_polarized(&rho, ParticleStatistics::Boson).unwrap();
            let noiseless =
                reconstruct_rho_polarized(&table, c, DetectorVariant::FourDetector).unwrap();
            let counts = sample_counts(&table, shots, 1200 + seed * 7 + rung as u64).unwrap();
            let freq = empirical_table(&table, &counts).unwrap();
            let sampled =
                reconstruct_rho_polarized(&freq, c, DetectorVariant::FourDetector).unwrap();
            let mut frob = 0.0f64;
            for i in 0..4 {
                for j in 0..4 {
                    let d_re = sampled.re()[(i, j)] - noiseless.re()[(i, j)];
                    let d_im = sampled.im()[(i, j)] - noiseless.im()[(i, j)];
                    frob += d_re * d_re + d_im * d_im;
                }
            }
            errors.push(frob.sqrt());
        }
        errors.sort_by(f64::total_cmp);
        medians.push(errors[errors.len() / 2]);
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "medians not decreasing: {medians:?}"
    );
}

#[test]
fn projection_moves_sampled_estimates_toward_truth() {
    let g = grid(8);
    let c = WaveFunction::flat_amplitude(g);
    let mut gains = Vec::new();
    for seed in 0..11u64 {
        let rank = 1 + (seed as usize) % 8;
        let rho = DensityMatrix::random(g, rank, 1300 + seed).unwrap();
        let table = joint_probabilities_polarized(&rho, ParticleStatistics::Boson).unwrap();
        let counts = sample_counts(&table, 1_000_000, 1400 + seed).unwrap();
        let freq = empirical_table(&table, &counts).unwrap();
        let estimate =
            reconstruct_rho_polarized(&freq, c, DetectorVariant::FourDetector).unwrap();
        let raw_err = estimate.frobenius_error(&rho);
        let projected = estimate.to_density(true).unwrap();
        assert!(projected.rho.is_physical());
        let mut frob = 0.0f64;
        for i in 0..8 {
            for j in 0..8 {
                frob += (projected.rho.get(i, j) - rho.get(i, j)).norm_sqr();
            }
        }
        gains.push(raw_err - frob.sqrt());
    }
    gains.sort_by(f64::total_cmp);
    let median_gain = gains[gains.len() / 2];
    assert!(
        median_gain > 0.0,
        "projection did not help at the median: {median_gain:.3e}"
    );
}

#[test]
fn exclusive_outcome_count_matches_the_mode_grid_product() {
    // M·(M+1)/2 keys for M = modes × positions; a quick shape check that
    // the deduplicated outcome set is complete.
    let g = grid(5);
    let flat = WaveFunction::flat(g);
    let psi = WaveFunction::random(g, 1);
    let t =
        joint_probabilities_pure(&balanced_splitter(), &psi, &flat, ParticleStatistics::Boson)
            .unwrap();
    assert_eq!(t.len(), 10 * 11 / 2);
    let rho = DensityMatrix::random(g, 2, 2).unwrap();
    let tp = joint_probabilities_polarized(&rho, ParticleStatistics::Boson).unwrap();
    assert_eq!(tp.len(), 20 * 21 / 2);
}

#[test]
fn tables_reject_out_of_range_keys() {
    use homlab::interferometer::{Detection, OutcomeKey, OutcomeTable};
    let g = grid(4);
    let mut probabilities = BTreeMap::new();
    probabilities.insert(
        OutcomeKey::new(
            Detection { mode: 2, pos: 0 },
            Detection { mode: 0, pos: 0 },
        ),
        0.5,
    );
    let labels = vec![
        homlab::ModeLabel::port(1),
        homlab::ModeLabel::port(2),
    ];
    assert!(OutcomeTable::from_parts(
        g,
        ParticleStatistics::Boson,
        String::new(),
        labels,
        probabilities
    )
    .is_err());
}

#[test]
fn brewster_and_rotation_round_trip_against_quarter_wave() {
    // sanity composition: rotating the quarter-wave basis back and forth is
    // the identity on the composite at eta = 1
    let u = compose(&[
        rotation(0.4),
        quarter_wave(),
        brewster(1.0).unwrap(),
        quarter_wave(),
        quarter_wave(),
        quarter_wave(),
        rotation(-0.4),
    ])
    .unwrap();
    assert!(u.is_unitary());
    for i in 0..2 {
        for j in 0..2 {
            let expected = if i == j { Complex64::ONE } else { Complex64::ZERO };
            assert!((u.entry(i, j) - expected).norm() < 1e-13);
        }
    }
}
