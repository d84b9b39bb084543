//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Tolerances are pinned here, not imported, so the gate cannot drift.

use std::time::Instant;

use homlab::interferometer::{
    empirical_table, joint_probabilities_mixed, joint_probabilities_polarized,
    joint_probabilities_pure, sample_counts,
};
use homlab::optics::{
    balanced_splitter, classify_phase_condition, exchange_products, haar_random_unitary,
    imaginary_access_eta, lossy_tomography_matrix, PhaseCondition,
};
use homlab::tomography::{
    assemble_density, global_phase_distance, parallelogram_check, pure_candidates,
    reconstruct_amplitude, reconstruct_cos_phase, reconstruct_rho_general,
    reconstruct_rho_polarized, DetectorVariant,
};
use homlab::{DensityMatrix, Grid, ParticleStatistics, WaveFunction};
use num_complex::Complex64;

fn grid(n: usize) -> Grid {
    Grid::new(n, 0.0, n as f64).unwrap()
}

fn statistics_for(seed: u64) -> ParticleStatistics {
    if seed % 2 == 0 {
        ParticleStatistics::Boson
    } else {
        ParticleStatistics::Fermion
    }
}

#[test]
fn criterion_01_hom_dip() {
    let g = grid(32);
    let psi = WaveFunction::gaussian(g, 16.0, 3.0).unwrap();

    let start = Instant::now();
    let bosons =
        joint_probabilities_pure(&balanced_splitter(), &psi, &psi, ParticleStatistics::Boson)
            .unwrap();
    let elapsed = start.elapsed();

    let max_coincidence = bosons.max_coincidence_probability();
    assert!(
        max_coincidence < 1e-12,
        "bosonic coincidence survived the dip: {max_coincidence:.3e}"
    );

    let fermions = joint_probabilities_pure(
        &balanced_splitter(),
        &psi,
        &psi,
        ParticleStatistics::Fermion,
    )
    .unwrap();
    let mut max_same_port = 0.0f64;
    for (key, &p) in fermions.iter() {
        if key.first().mode == key.second().mode {
            max_same_port = max_same_port.max(p);
        }
    }
    assert!(
        max_same_port < 1e-12,
        "fermions shared a port: {max_same_port:.3e}"
    );
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "n = 32 table took {elapsed:?}"
    );
    println!(
        "criterion 01 (HOM dip): PASS — max coincidence {max_coincidence:.2e}, \
         max fermion same-port {max_same_port:.2e}, built in {elapsed:?}"
    );
}

#[test]
fn criterion_02_normalization() {
    let g = grid(8);
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let u = haar_random_unitary(2, 1000 + seed).unwrap();
        let psi_r = WaveFunction::random(g, 2000 + seed);
        let total = if seed % 2 == 0 {
            let psi_u = WaveFunction::random(g, 3000 + seed);
            joint_probabilities_pure(&u, &psi_u, &psi_r, statistics_for(seed))
                .unwrap()
                .total_probability()
        } else {
            let rank = 1 + (seed as usize) % g.len();
            let rho = DensityMatrix::random(g, rank, 4000 + seed).unwrap();
            joint_probabilities_mixed(&u, &rho, &psi_r, statistics_for(seed))
                .unwrap()
                .total_probability()
        };
        worst = worst.max((total - 1.0).abs());
    }
    assert!(worst < 1e-9, "normalization defect {worst:.3e}");
    println!("criterion 02 (normalization over 100 random setups): PASS — worst |Σp − 1| = {worst:.2e}");
}

#[test]
fn criterion_03_unitary_exchange_products_real() {
    let mut worst = 0.0f64;
    for seed in 0..1000u64 {
        let u = haar_random_unitary(2, seed).unwrap();
        let k = exchange_products(&u).unwrap();
        worst = worst.max(k.max_imag());
        assert_eq!(
            classify_phase_condition(&u, 1e-10).unwrap(),
            PhaseCondition::RealAccess,
            "seed {seed} classified away from RealAccess"
        );
    }
    assert!(worst < 1e-12, "max |Im K| = {worst:.3e}");
    println!("criterion 03 (exchange products real for 1000 Haar unitaries): PASS — max |Im K| = {worst:.2e}");
}

#[test]
fn criterion_04_pure_round_trip() {
    let g = grid(16);
    let c = WaveFunction::flat_amplitude(g);
    let flat = WaveFunction::flat(g);
    let mut worst_amp = 0.0f64;
    let mut worst_cos = 0.0f64;
    let mut worst_candidate = 0.0f64;
    let mut worst_pair = 0.0f64;
    for seed in 0..100u64 {
        let statistics = statistics_for(seed);
        let psi = WaveFunction::random(g, 5000 + seed);
        let table = joint_probabilities_pure(&balanced_splitter(), &psi, &flat, statistics)
            .unwrap();

        let amp = reconstruct_amplitude(&table, c).unwrap();
        for i in 0..g.len() {
            worst_amp = worst_amp.max((amp.value(i) - psi.amplitude(i).norm()).abs());
        }

        let cosm = reconstruct_cos_phase(&table, &amp, c, statistics).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                if cosm.is_masked(i, j) {
                    continue;
                }
                let truth = (psi.amplitude(i).arg() - psi.amplitude(j).arg()).cos();
                worst_cos = worst_cos.max((cosm.value(i, j) - truth).abs());
            }
        }

        let candidates = pure_candidates(&amp, &cosm).unwrap();
        let best = global_phase_distance(&candidates.primary, &psi)
            .unwrap()
            .min(global_phase_distance(&candidates.conjugate, &psi).unwrap());
        worst_candidate = worst_candidate.max(best);

        let t1 = joint_probabilities_pure(
            &balanced_splitter(),
            &candidates.primary.normalized().unwrap(),
            &flat,
            statistics,
        )
        .unwrap();
        let t2 = joint_probabilities_pure(
            &balanced_splitter(),
            &candidates.conjugate.normalized().unwrap(),
            &flat,
            statistics,
        )
        .unwrap();
        for (key, &p) in t1.iter() {
            worst_pair = worst_pair.max((p - t2.probability(key).unwrap()).abs());
        }
    }
    assert!(worst_amp < 1e-10, "amplitude error {worst_amp:.3e}");
    assert!(worst_cos < 1e-9, "cos error {worst_cos:.3e}");
    assert!(worst_candidate < 1e-8, "candidate distance {worst_candidate:.3e}");
    assert!(worst_pair < 1e-12, "conjugate pair tables differ by {worst_pair:.3e}");
    println!(
        "criterion 04 (pure round-trip, 100 states): PASS — amp {worst_amp:.2e}, \
         cos {worst_cos:.2e}, candidate {worst_candidate:.2e}, pair tables {worst_pair:.2e}"
    );
}

#[test]
fn criterion_05_polarization_round_trip() {
    let g = grid(8);
    let c = WaveFunction::flat_amplitude(g);
    let mut worst_four = 0.0f64;
    let mut worst_three = 0.0f64;
    let mut worst_gap = 0.0f64;
    for seed in 0..50u64 {
        let rank = 1 + (seed as usize) % 8;
        let rho = DensityMatrix::random(g, rank, 6000 + seed).unwrap();
        let table = joint_probabilities_polarized(&rho, statistics_for(seed)).unwrap();
        let four = reconstruct_rho_polarized(&table, c, DetectorVariant::FourDetector).unwrap();
        let three =
            reconstruct_rho_polarized(&table, c, DetectorVariant::ThreeDetector).unwrap();
        worst_four = worst_four.max(four.max_entry_error(&rho));
        worst_three = worst_three.max(three.max_entry_error(&rho));
        for i in 0..8 {
            for j in 0..8 {
                let a = Complex64::new(four.re()[(i, j)], four.im()[(i, j)]);
                let b = Complex64::new(three.re()[(i, j)], three.im()[(i, j)]);
                worst_gap = worst_gap.max((a - b).norm());
            }
        }
    }
    assert!(worst_four < 1e-10, "four-detector error {worst_four:.3e}");
    assert!(worst_three < 1e-10, "three-detector error {worst_three:.3e}");
    assert!(worst_gap < 1e-12, "variant disagreement {worst_gap:.3e}");
    println!(
        "criterion 05 (polarization round-trip, 50 states): PASS — four {worst_four:.2e}, \
         three {worst_three:.2e}, agreement {worst_gap:.2e}"
    );
}

#[test]
fn criterion_06_loss_scheme_conditions() {
    let eta = imaginary_access_eta();
    let u = lossy_tomography_matrix(eta).unwrap();
    // closed form (i/2)·(√2 − 1 − i)·[[1, (i−1)/√2], [(i−1)/√2, 1]]
    let scale = Complex64::new(0.0, 0.5) * Complex64::new(std::f64::consts::SQRT_2 - 1.0, -1.0);
    let off = (Complex64::I - Complex64::ONE) / Complex64::new(std::f64::consts::SQRT_2, 0.0);
    let expected = [[scale, scale * off], [scale * off, scale]];
    let mut worst_entry = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst_entry = worst_entry.max((u.entry(i, j) - expected[i][j]).norm());
        }
    }
    assert!(worst_entry < 1e-12, "closed-form mismatch {worst_entry:.3e}");

    let k = exchange_products(&u).unwrap();
    let worst_re = k.at(1, 2).re.abs().max(k.at(2, 1).re.abs());
    assert!(worst_re < 1e-12, "coincidence K not purely imaginary: {worst_re:.3e}");
    assert_eq!(
        classify_phase_condition(&u, 1e-10).unwrap(),
        PhaseCondition::ImaginaryCoincidenceAccess
    );

    let lossless = lossy_tomography_matrix(1.0).unwrap();
    let s = Complex64::new(0.5, 0.5);
    let expected_lossless = [[s, s * Complex64::I], [s * Complex64::I, s]];
    let mut worst_lossless = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst_lossless =
                worst_lossless.max((lossless.entry(i, j) - expected_lossless[i][j]).norm());
        }
    }
    assert!(worst_lossless < 1e-12, "lossless form mismatch {worst_lossless:.3e}");
    assert_eq!(
        classify_phase_condition(&lossless, 1e-10).unwrap(),
        PhaseCondition::RealAccess
    );
    println!(
        "criterion 06 (loss-scheme conditions): PASS — closed form {worst_entry:.2e}, \
         |Re K_coinc| {worst_re:.2e}, lossless form {worst_lossless:.2e}"
    );
}

#[test]
fn criterion_07_combined_re_im_reconstruction() {
    let g = grid(8);
    let c = WaveFunction::flat_amplitude(g);
    let flat = WaveFunction::flat(g);
    let splitter = balanced_splitter();
    let lossy = lossy_tomography_matrix(imaginary_access_eta()).unwrap();
    let mut worst_combined = 0.0f64;
    let mut worst_route_gap = 0.0f64;
    for seed in 0..50u64 {
        let statistics = statistics_for(seed);
        let rank = 1 + (seed as usize) % 8;
        let rho = DensityMatrix::random(g, rank, 7000 + seed).unwrap();

        let t_re = joint_probabilities_mixed(&splitter, &rho, &flat, statistics).unwrap();
        let est_re = reconstruct_rho_general(&t_re, &splitter, c, statistics).unwrap();
        let t_im = joint_probabilities_mixed(&lossy, &rho, &flat, statistics).unwrap();
        let est_im = reconstruct_rho_general(&t_im, &lossy, c, statistics).unwrap();

        let combined = assemble_density(g, est_re.re(), est_im.im(), true).unwrap();
        let single = est_im.to_density(true).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                worst_combined =
                    worst_combined.max((combined.rho.get(i, j) - rho.get(i, j)).norm());
                worst_route_gap = worst_route_gap
                    .max((combined.rho.get(i, j) - single.rho.get(i, j)).norm());
            }
        }
    }
    assert!(worst_combined < 1e-10, "combined error {worst_combined:.3e}");
    assert!(worst_route_gap < 1e-10, "route disagreement {worst_route_gap:.3e}");
    println!(
        "criterion 07 (combined Re⊕Im, 50 states): PASS — error {worst_combined:.2e}, \
         single-setup route gap {worst_route_gap:.2e}"
    );
}

#[test]
fn criterion_08_parallelogram_identity() {
    let g = grid(6);
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let rank = 1 + (seed as usize) % 6;
        let rho = DensityMatrix::random(g, rank, 8000 + seed).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                worst = worst.max(parallelogram_check(&rho, i, j).unwrap());
            }
        }
    }
    assert!(worst < 1e-12, "parallelogram defect {worst:.3e}");
    println!("criterion 08 (parallelogram identity, 100 matrices): PASS — max defect {worst:.2e}");
}

#[test]
fn criterion_09_finite_statistics() {
    let g = grid(8);
    let c = WaveFunction::flat_amplitude(g);
    let ladder = [10_000u64, 100_000, 1_000_000];
    let mut medians = Vec::new();
    for (rung, &shots) in ladder.iter().enumerate() {
        let mut errors = Vec::new();
        for seed in 0..11u64 {
            let rank = 1 + (seed as usize) % 8;
            let rho = DensityMatrix::random(g, rank, 9000 + seed).unwrap();
            let table = joint_probabilities_polarized(&rho, ParticleStatistics::Boson).unwrap();
            let counts = sample_counts(&table, shots, 10_000 + seed * 10 + rung as u64).unwrap();
            let freq = empirical_table(&table, &counts).unwrap();
            let estimate =
                reconstruct_rho_polarized(&freq, c, DetectorVariant::FourDetector).unwrap();
            let projected = estimate.to_density(true).unwrap();
            assert!(
                projected.rho.is_physical(),
                "projected estimate not physical at shots {shots} seed {seed}"
            );
            let mut frob = 0.0f64;
            for i in 0..8 {
                for j in 0..8 {
                    frob += (projected.rho.get(i, j) - rho.get(i, j)).norm_sqr();
                }
            }
            errors.push(frob.sqrt());
        }
        errors.sort_by(f64::total_cmp);
        medians.push(errors[errors.len() / 2]);
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "medians not strictly decreasing: {medians:?}"
    );
    assert!(
        medians[2] < 0.02,
        "median error at 10^6 shots is {:.4}",
        medians[2]
    );
    println!(
        "criterion 09 (finite statistics ladder): PASS — medians {:.4} > {:.4} > {:.4} < 0.02",
        medians[0], medians[1], medians[2]
    );
}

#[test]
fn criterion_10_performance() {
    let run = || {
        let g64 = grid(64);
        let psi = WaveFunction::random(g64, 1);
        let flat = WaveFunction::flat(g64);
        let rho = DensityMatrix::random(g64, 8, 2).unwrap();
        let start = Instant::now();
        let t_pure =
            joint_probabilities_pure(&balanced_splitter(), &psi, &flat, ParticleStatistics::Boson)
                .unwrap();
        let t_mixed = joint_probabilities_mixed(
            &balanced_splitter(),
            &rho,
            &flat,
            ParticleStatistics::Boson,
        )
        .unwrap();
        let two_port = start.elapsed();

        let g32 = grid(32);
        let rho32 = DensityMatrix::random(g32, 4, 3).unwrap();
        let start = Instant::now();
        let t_pol = joint_probabilities_polarized(&rho32, ParticleStatistics::Boson).unwrap();
        let polarized = start.elapsed();
        (two_port, polarized, t_pure.len(), t_mixed.len(), t_pol.len())
    };
    // Hold the measurement to one thread so the bound is the sequential one.
    let (two_port, polarized, n_pure, n_mixed, n_pol) = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(n_pure, 128 * 129 / 2);
    assert_eq!(n_mixed, 128 * 129 / 2);
    assert_eq!(n_pol, 128 * 129 / 2);
    assert!(
        two_port.as_secs_f64() < 5.0,
        "n = 64 two-port tables took {two_port:?}"
    );
    assert!(
        polarized.as_secs_f64() < 5.0,
        "n = 32 polarization table took {polarized:?}"
    );
    println!(
        "criterion 10 (performance, single-threaded): PASS — n=64 two-port {two_port:?}, \
         n=32 polarized {polarized:?}"
    );
}
