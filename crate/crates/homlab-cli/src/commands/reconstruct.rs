//! `homlab reconstruct`: invert a simulated or sampled table into a state
//! estimate, guarded by setup/mode compatibility checks.

use std::path::{Path, PathBuf};

use homlab::interferometer::{empirical_table, OutcomeTable};
use homlab::io::{count_table_from_csv, outcome_table_from_csv, OUTCOME_CSV_HEADER};
use homlab::optics::{balanced_splitter, classify_phase_condition, PhaseCondition};
use homlab::tol;
use homlab::tomography::{
    pure_candidates_with_tol, reconstruct_amplitude, reconstruct_cos_phase,
    reconstruct_rho_general, reconstruct_rho_polarized, DetectorVariant, RhoEstimate,
};
use homlab::{Error, ParticleStatistics, WaveFunction};

use crate::config::read_json;
use crate::manifest::{
    pure_candidates_json, rho_estimate_json, to_pretty_json, write_atomic, PureDiagnosticsJson,
    SetupDescriptor,
};
use crate::{CliError, CliResult, ReconstructMode, VariantArg};

pub struct Args {
    pub mode: ReconstructMode,
    pub table: PathBuf,
    pub setup: PathBuf,
    pub table_im: Option<PathBuf>,
    pub setup_im: Option<PathBuf>,
    pub variant: Option<VariantArg>,
    pub out: PathBuf,
    pub project: bool,
    pub phase_tol: Option<f64>,
}

pub fn run(args: Args) -> CliResult<()> {
    let descriptor: SetupDescriptor = read_json(&args.setup)?;
    let table = load_table(&args.table, &descriptor)?;
    let estimate_name = "estimate.json";

    let contents = match args.mode {
        ReconstructMode::Pure => reconstruct_pure(&args, &descriptor, &table)?,
        ReconstructMode::MixedReal => {
            let estimate = general_estimate(
                &descriptor,
                &table,
                PhaseCondition::RealAccess,
                "mixed-real",
            )?;
            to_pretty_json(&rho_estimate_json(&estimate, args.project)?)?
        }
        ReconstructMode::MixedLossy => {
            let estimate = general_estimate(
                &descriptor,
                &table,
                PhaseCondition::ImaginaryCoincidenceAccess,
                "mixed-lossy",
            )?;
            to_pretty_json(&rho_estimate_json(&estimate, args.project)?)?
        }
        ReconstructMode::MixedPolarization => {
            if table.mode_count() != 4 {
                return Err(CliError::physics(
                    "mixed-polarization expects a four-mode table",
                ));
            }
            let variant = match args.variant.unwrap_or(VariantArg::FourDetector) {
                VariantArg::FourDetector => DetectorVariant::FourDetector,
                VariantArg::ThreeDetector => DetectorVariant::ThreeDetector,
            };
            let c = descriptor.flat_amplitude()?;
            let estimate = reconstruct_rho_polarized(&table, c, variant)
                .map_err(reconstruction_error)?;
            to_pretty_json(&rho_estimate_json(&estimate, args.project)?)?
        }
        ReconstructMode::MixedCombined => {
            let (table_im_path, setup_im_path) = match (&args.table_im, &args.setup_im) {
                (Some(t), Some(s)) => (t, s),
                _ => {
                    return Err(CliError::config(
                        "mixed-combined needs --table-im and --setup-im",
                    ))
                }
            };
            let descriptor_im: SetupDescriptor = read_json(setup_im_path)?;
            let table_im = load_table(table_im_path, &descriptor_im)?;
            if descriptor.grid()? != descriptor_im.grid()? {
                return Err(CliError::physics(
                    "the two tables live on different grids",
                ));
            }
            if descriptor.statistics()? != descriptor_im.statistics()? {
                return Err(CliError::physics(
                    "the two tables use different exchange statistics",
                ));
            }
            let est_re = general_estimate(
                &descriptor,
                &table,
                PhaseCondition::RealAccess,
                "mixed-combined (real source)",
            )?;
            let est_im = general_estimate(
                &descriptor_im,
                &table_im,
                PhaseCondition::ImaginaryCoincidenceAccess,
                "mixed-combined (imaginary source)",
            )?;
            let combined = RhoEstimate::from_components(
                est_re.grid(),
                est_re.re().clone(),
                est_im.im().clone(),
                true,
                true,
            );
            to_pretty_json(&rho_estimate_json(&combined, args.project)?)?
        }
    };

    write_atomic(&args.out.join(estimate_name), &contents)?;
    println!("wrote {estimate_name}");
    Ok(())
}

/// Parse an outcome or count CSV against its setup descriptor; counts are
/// converted to empirical frequencies.
fn load_table(path: &Path, descriptor: &SetupDescriptor) -> CliResult<OutcomeTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let grid = descriptor.grid()?;
    let statistics = descriptor.statistics()?;
    let matrix = descriptor.matrix()?;
    let labels = matrix.output_labels().to_vec();
    let header = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
        .trim()
        .to_string();
    let result = if header == format!("{OUTCOME_CSV_HEADER},count") {
        count_table_from_csv(
            &text,
            grid,
            statistics,
            labels,
            descriptor.setup.clone(),
        )
        .and_then(|(table, counts)| empirical_table(&table, &counts))
    } else {
        outcome_table_from_csv(&text, grid, statistics, labels, descriptor.setup.clone())
    };
    result.map_err(|e| match e {
        Error::Parse(_) => CliError::config(format!("{}: {e}", path.display())),
        other => CliError::physics(format!("{}: {other}", path.display())),
    })
}

/// Run the general two-port inversion after checking that the setup's
/// phase classification matches what the mode requires.
fn general_estimate(
    descriptor: &SetupDescriptor,
    table: &OutcomeTable,
    required: PhaseCondition,
    mode_name: &str,
) -> CliResult<RhoEstimate> {
    let matrix = descriptor.matrix()?;
    if matrix.mode_count() != 2 || table.mode_count() != 2 {
        return Err(CliError::physics(format!(
            "{mode_name} expects a two-port setup and table"
        )));
    }
    let class = classify_phase_condition(&matrix, tol::CLASSIFY_TOL)
        .map_err(|e| CliError::physics(e.to_string()))?;
    if class != required {
        return Err(CliError::physics(format!(
            "classification mismatch: {mode_name} requires {required} but the '{}' setup \
             classifies as {class}",
            descriptor.setup
        )));
    }
    let c = descriptor.flat_amplitude()?;
    reconstruct_rho_general(table, &matrix, c, descriptor.statistics()?)
        .map_err(reconstruction_error)
}

fn reconstruct_pure(
    args: &Args,
    descriptor: &SetupDescriptor,
    table: &OutcomeTable,
) -> CliResult<String> {
    let matrix = descriptor.matrix()?;
    if matrix.mode_count() != 2 {
        return Err(CliError::physics(
            "pure reconstruction expects a two-port setup",
        ));
    }
    let splitter = balanced_splitter();
    let mut deviation = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            deviation = deviation.max((matrix.entry(i, j) - splitter.entry(i, j)).norm());
        }
    }
    if deviation > 1e-8 {
        return Err(CliError::physics(format!(
            "setup/table mismatch: pure reconstruction requires the balanced splitter, \
             but the '{}' setup deviates from it by {deviation:.3e}",
            descriptor.setup
        )));
    }
    let c = descriptor.flat_amplitude()?;
    let statistics = descriptor.statistics()?;
    let amp = reconstruct_amplitude(table, c).map_err(reconstruction_error)?;
    let cosm =
        reconstruct_cos_phase(table, &amp, c, statistics).map_err(reconstruction_error)?;
    let phase_tol = args.phase_tol.unwrap_or(tol::PHASE_CONSISTENCY_TOL);
    let candidates =
        pure_candidates_with_tol(&amp, &cosm, phase_tol).map_err(reconstruction_error)?;

    let n = table.grid().len();
    let mut cos_residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if cosm.is_masked(i, j) {
                continue;
            }
            let phi_i = candidates.primary.amplitude(i).arg();
            let phi_j = candidates.primary.amplitude(j).arg();
            cos_residual = cos_residual.max(((phi_i - phi_j).cos() - cosm.value(i, j)).abs());
        }
    }
    let table_residual = candidate_table_residual(&candidates.primary, table, statistics)?;

    let json = pure_candidates_json(
        &candidates,
        amp.values(),
        PureDiagnosticsJson {
            masked_fraction: cosm.masked_fraction(),
            cos_residual,
            table_residual,
        },
    );
    to_pretty_json(&json)
}

/// Re-simulate the candidate through the balanced splitter and compare with
/// the input table.
fn candidate_table_residual(
    candidate: &WaveFunction,
    table: &OutcomeTable,
    statistics: ParticleStatistics,
) -> CliResult<f64> {
    let normalized = candidate
        .normalized()
        .map_err(|e| CliError::physics(e.to_string()))?;
    let flat = WaveFunction::flat(table.grid());
    let resim = homlab::interferometer::joint_probabilities_pure(
        &balanced_splitter(),
        &normalized,
        &flat,
        statistics,
    )
    .map_err(|e| CliError::physics(e.to_string()))?;
    let mut worst = 0.0f64;
    for (key, &p) in table.iter() {
        let q = resim.probability(key).unwrap_or(0.0);
        worst = worst.max((p - q).abs());
    }
    Ok(worst)
}

fn reconstruction_error(err: Error) -> CliError {
    CliError::physics(err.to_string())
}
