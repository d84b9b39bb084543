//! `homlab simulate`: config → outcome table + manifest.

use std::path::Path;

use homlab::interferometer::{
    joint_probabilities_mixed, joint_probabilities_polarized, joint_probabilities_pure,
    OutcomeTable,
};
use homlab::io::outcome_table_to_csv;
use homlab::DensityMatrix;

use crate::config::{self, PreparedRun, SetupKind, UnknownState};
use crate::manifest::{
    build_setup_descriptor, config_hash, table_json, to_pretty_json, write_atomic, Manifest,
};
use crate::{CliError, CliResult, OutputFormat};

pub fn run(config_path: &Path, out_dir: &Path, format: OutputFormat) -> CliResult<()> {
    let (cfg, bytes) = config::load_config(config_path)?;
    let dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let run = config::prepare(cfg, bytes, dir)?;
    let table = compute_table(&run)?;
    let (table_name, contents) = render_table(&run, &table, format)?;

    let manifest = Manifest {
        setup: build_setup_descriptor(&run),
        config_hash: config_hash(&run.config_bytes),
        total_probability: table.total_probability(),
        max_coincidence_probability: table.max_coincidence_probability(),
        shots: None,
        seed: None,
        discarded: None,
        outputs: vec![table_name.clone()],
    };
    let manifest_name = run.output.manifest.clone();
    let manifest_contents = to_pretty_json(&manifest)?;

    write_atomic(&out_dir.join(&table_name), &contents)?;
    write_atomic(&out_dir.join(&manifest_name), &manifest_contents)?;
    println!(
        "simulate: {} unknown through the {} setup, {} outcomes, total probability {:.12}",
        crate::manifest::describe_unknown(&run.unknown),
        run.setup_kind.name(),
        table.len(),
        table.total_probability()
    );
    println!("wrote {} and {}", table_name, manifest_name);
    Ok(())
}

pub fn compute_table(run: &PreparedRun) -> CliResult<OutcomeTable> {
    let result = match (&run.setup_kind, &run.unknown) {
        (SetupKind::Polarization, UnknownState::Mixed(rho)) => {
            joint_probabilities_polarized(rho, run.statistics)
        }
        (SetupKind::Polarization, UnknownState::Pure(psi)) => DensityMatrix::from_pure(psi)
            .and_then(|rho| joint_probabilities_polarized(&rho, run.statistics)),
        (_, UnknownState::Pure(psi)) => {
            joint_probabilities_pure(&run.matrix, psi, &run.reference.state, run.statistics)
        }
        (_, UnknownState::Mixed(rho)) => {
            joint_probabilities_mixed(&run.matrix, rho, &run.reference.state, run.statistics)
        }
    };
    result.map_err(|e| CliError::physics(e.to_string()))
}

pub fn render_table(
    run: &PreparedRun,
    table: &OutcomeTable,
    format: OutputFormat,
) -> CliResult<(String, String)> {
    let (default_name, contents) = match format {
        OutputFormat::Csv => ("table.csv", outcome_table_to_csv(table)),
        OutputFormat::Json => ("table.json", to_pretty_json(&table_json(table, None))?),
    };
    let name = if run.output.table.is_empty() {
        default_name.to_string()
    } else {
        run.output.table.clone()
    };
    Ok((name, contents))
}
