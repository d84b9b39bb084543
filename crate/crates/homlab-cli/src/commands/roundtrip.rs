//! `homlab roundtrip`: simulate a seeded state, reconstruct it, and report
//! per-check pass/fail lines against the scheme's tolerances.

use homlab::interferometer::{joint_probabilities_mixed, joint_probabilities_polarized,
    joint_probabilities_pure};
use homlab::optics::{balanced_splitter, imaginary_access_eta, lossy_tomography_matrix};
use homlab::tomography::{
    assemble_density, global_phase_distance, pure_candidates, reconstruct_amplitude,
    reconstruct_cos_phase, reconstruct_rho_general, reconstruct_rho_polarized, DetectorVariant,
};
use homlab::{DensityMatrix, Grid, ParticleStatistics, WaveFunction};

use crate::{CliError, CliResult, SchemeArg, StatisticsArg};

// Scheme tolerances for noiseless round-trips.
const PURE_AMPLITUDE_TOL: f64 = 1e-10;
const PURE_COS_TOL: f64 = 1e-9;
const PURE_CANDIDATE_TOL: f64 = 1e-8;
const PURE_PAIR_TABLE_TOL: f64 = 1e-12;
const POLARIZATION_TOL: f64 = 1e-10;
const POLARIZATION_AGREEMENT_TOL: f64 = 1e-12;
const COMBINED_TOL: f64 = 1e-10;
const LOSSY_SINGLE_TOL: f64 = 1e-10;
const ROUTE_AGREEMENT_TOL: f64 = 1e-10;

struct Report {
    failed: bool,
}

impl Report {
    fn new() -> Self {
        Self { failed: false }
    }

    fn check(&mut self, name: &str, value: f64, tol: f64) {
        let pass = value < tol;
        if !pass {
            self.failed = true;
        }
        println!(
            "check={name} value={value:.3e} tol={tol:.1e} status={}",
            if pass { "PASS" } else { "FAIL" }
        );
    }

    fn assert_flag(&mut self, name: &str, ok: bool) {
        if !ok {
            self.failed = true;
        }
        println!(
            "check={name} status={}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

pub fn run(scheme: SchemeArg, seed: u64, statistics: StatisticsArg) -> CliResult<()> {
    let statistics = match statistics {
        StatisticsArg::Boson => ParticleStatistics::Boson,
        StatisticsArg::Fermion => ParticleStatistics::Fermion,
    };
    let mut report = Report::new();
    let scheme_name = match scheme {
        SchemeArg::Pure => "pure",
        SchemeArg::Polarization => "polarization",
        SchemeArg::ReImCombined => "re-im-combined",
        SchemeArg::LossySingle => "lossy-single",
    };
    match scheme {
        SchemeArg::Pure => pure_scheme(seed, statistics, &mut report),
        SchemeArg::Polarization => polarization_scheme(seed, statistics, &mut report),
        SchemeArg::ReImCombined => combined_scheme(seed, statistics, &mut report),
        SchemeArg::LossySingle => lossy_single_scheme(seed, statistics, &mut report),
    }
    .map_err(|e| CliError::physics(e.to_string()))?;

    let verdict = if report.failed { "FAIL" } else { "PASS" };
    println!("roundtrip scheme={scheme_name} seed={seed} statistics={statistics}: {verdict}");
    if report.failed {
        Err(CliError {
            code: 1,
            message: format!("roundtrip {scheme_name} failed"),
        })
    } else {
        Ok(())
    }
}

fn pure_scheme(
    seed: u64,
    statistics: ParticleStatistics,
    report: &mut Report,
) -> homlab::Result<()> {
    let grid = Grid::new(16, 0.0, 16.0)?;
    let psi = WaveFunction::random(grid, seed);
    let flat = WaveFunction::flat(grid);
    let c = WaveFunction::flat_amplitude(grid);
    let table = joint_probabilities_pure(&balanced_splitter(), &psi, &flat, statistics)?;

    let amp = reconstruct_amplitude(&table, c)?;
    let amp_err = (0..grid.len())
        .map(|i| (amp.value(i) - psi.amplitude(i).norm()).abs())
        .fold(0.0f64, f64::max);
    report.check("amplitude_max_error", amp_err, PURE_AMPLITUDE_TOL);

    let cosm = reconstruct_cos_phase(&table, &amp, c, statistics)?;
    let mut cos_err = 0.0f64;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            if cosm.is_masked(i, j) {
                continue;
            }
            let truth =
                (psi.amplitude(i).arg() - psi.amplitude(j).arg()).cos();
            cos_err = cos_err.max((cosm.value(i, j) - truth).abs());
        }
    }
    report.check("cos_phase_max_error", cos_err, PURE_COS_TOL);

    let candidates = pure_candidates(&amp, &cosm)?;
    let d_primary = global_phase_distance(&candidates.primary, &psi)?;
    let d_conjugate = global_phase_distance(&candidates.conjugate, &psi)?;
    println!("candidate=1 distance_to_truth={d_primary:.3e}");
    println!("candidate=2 (conjugate) distance_to_truth={d_conjugate:.3e}");
    report.check(
        "best_candidate_distance",
        d_primary.min(d_conjugate),
        PURE_CANDIDATE_TOL,
    );

    // Both candidates are experimentally indistinguishable: identical tables.
    let mut pair_diff = 0.0f64;
    let t1 = joint_probabilities_pure(
        &balanced_splitter(),
        &candidates.primary.normalized()?,
        &flat,
        statistics,
    )?;
    let t2 = joint_probabilities_pure(
        &balanced_splitter(),
        &candidates.conjugate.normalized()?,
        &flat,
        statistics,
    )?;
    for (key, &p) in t1.iter() {
        pair_diff = pair_diff.max((p - t2.probability(key).unwrap_or(0.0)).abs());
    }
    report.check("conjugate_pair_table_diff", pair_diff, PURE_PAIR_TABLE_TOL);
    Ok(())
}

fn seeded_density(grid: Grid, seed: u64) -> homlab::Result<DensityMatrix> {
    let rank = 1 + (seed as usize) % grid.len();
    DensityMatrix::random(grid, rank, seed)
}

fn polarization_scheme(
    seed: u64,
    statistics: ParticleStatistics,
    report: &mut Report,
) -> homlab::Result<()> {
    let grid = Grid::new(8, 0.0, 8.0)?;
    let c = WaveFunction::flat_amplitude(grid);
    let rho = seeded_density(grid, seed)?;
    let table = joint_probabilities_polarized(&rho, statistics)?;
    let four = reconstruct_rho_polarized(&table, c, DetectorVariant::FourDetector)?;
    let three = reconstruct_rho_polarized(&table, c, DetectorVariant::ThreeDetector)?;
    report.check(
        "four_detector_max_error",
        four.max_entry_error(&rho),
        POLARIZATION_TOL,
    );
    report.check(
        "three_detector_max_error",
        three.max_entry_error(&rho),
        POLARIZATION_TOL,
    );
    let mut variant_diff = 0.0f64;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let d_re = (four.re()[(i, j)] - three.re()[(i, j)]).abs();
            let d_im = (four.im()[(i, j)] - three.im()[(i, j)]).abs();
            variant_diff = variant_diff.max(d_re.max(d_im));
        }
    }
    report.check(
        "variant_agreement",
        variant_diff,
        POLARIZATION_AGREEMENT_TOL,
    );
    Ok(())
}

fn combined_scheme(
    seed: u64,
    statistics: ParticleStatistics,
    report: &mut Report,
) -> homlab::Result<()> {
    let grid = Grid::new(8, 0.0, 8.0)?;
    let c = WaveFunction::flat_amplitude(grid);
    let flat = WaveFunction::flat(grid);
    let rho = seeded_density(grid, seed)?;

    let splitter = balanced_splitter();
    let table_re = joint_probabilities_mixed(&splitter, &rho, &flat, statistics)?;
    let est_re = reconstruct_rho_general(&table_re, &splitter, c, statistics)?;

    let lossy = lossy_tomography_matrix(imaginary_access_eta())?;
    let table_im = joint_probabilities_mixed(&lossy, &rho, &flat, statistics)?;
    let est_im = reconstruct_rho_general(&table_im, &lossy, c, statistics)?;

    let combined = assemble_density(grid, est_re.re(), est_im.im(), true)?;
    let mut err = 0.0f64;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            err = err.max((combined.rho.get(i, j) - rho.get(i, j)).norm());
        }
    }
    report.check("combined_max_error", err, COMBINED_TOL);
    Ok(())
}

fn lossy_single_scheme(
    seed: u64,
    statistics: ParticleStatistics,
    report: &mut Report,
) -> homlab::Result<()> {
    let grid = Grid::new(8, 0.0, 8.0)?;
    let c = WaveFunction::flat_amplitude(grid);
    let flat = WaveFunction::flat(grid);
    let rho = seeded_density(grid, seed)?;

    let lossy = lossy_tomography_matrix(imaginary_access_eta())?;
    let table = joint_probabilities_mixed(&lossy, &rho, &flat, statistics)?;
    let single = reconstruct_rho_general(&table, &lossy, c, statistics)?;
    report.assert_flag(
        "re_and_im_from_one_table",
        single.re_present() && single.im_present(),
    );
    report.check(
        "single_route_max_error",
        single.max_entry_error(&rho),
        LOSSY_SINGLE_TOL,
    );

    // Cross-validate against the two-setup combination route.
    let splitter = balanced_splitter();
    let table_re = joint_probabilities_mixed(&splitter, &rho, &flat, statistics)?;
    let est_re = reconstruct_rho_general(&table_re, &splitter, c, statistics)?;
    let combined = assemble_density(grid, est_re.re(), single.im(), true)?;
    let single_assembled = single.to_density(true)?;
    let mut diff = 0.0f64;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            diff = diff
                .max((combined.rho.get(i, j) - single_assembled.rho.get(i, j)).norm());
        }
    }
    report.check("route_agreement", diff, ROUTE_AGREEMENT_TOL);
    Ok(())
}
