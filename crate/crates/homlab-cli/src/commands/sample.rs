//! `homlab sample`: config → outcome table, finite-shot counts, manifest.

use std::path::Path;

use homlab::interferometer::sample_counts;
use homlab::io::count_table_to_csv;

use crate::commands::simulate::{compute_table, render_table};
use crate::config;
use crate::manifest::{
    build_setup_descriptor, config_hash, table_json, to_pretty_json, write_atomic, Manifest,
};
use crate::{CliError, CliResult, OutputFormat};

pub fn run(
    config_path: &Path,
    out_dir: &Path,
    format: OutputFormat,
    shots: u64,
    seed: u64,
) -> CliResult<()> {
    let (cfg, bytes) = config::load_config(config_path)?;
    let dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let run = config::prepare(cfg, bytes, dir)?;
    let table = compute_table(&run)?;
    let counts = sample_counts(&table, shots, seed).map_err(|e| CliError::config(e.to_string()))?;

    let (table_name, table_contents) = render_table(&run, &table, format)?;
    let (counts_default, counts_contents) = match format {
        OutputFormat::Csv => ("counts.csv", count_table_to_csv(&table, &counts)),
        OutputFormat::Json => (
            "counts.json",
            to_pretty_json(&table_json(&table, Some(&counts)))?,
        ),
    };
    let counts_name = if run.output.counts.is_empty() {
        counts_default.to_string()
    } else {
        run.output.counts.clone()
    };

    let manifest = Manifest {
        setup: build_setup_descriptor(&run),
        config_hash: config_hash(&run.config_bytes),
        total_probability: table.total_probability(),
        max_coincidence_probability: table.max_coincidence_probability(),
        shots: Some(shots),
        seed: Some(seed),
        discarded: Some(counts.discarded),
        outputs: vec![table_name.clone(), counts_name.clone()],
    };
    let manifest_name = run.output.manifest.clone();
    let manifest_contents = to_pretty_json(&manifest)?;

    write_atomic(&out_dir.join(&table_name), &table_contents)?;
    write_atomic(&out_dir.join(&counts_name), &counts_contents)?;
    write_atomic(&out_dir.join(&manifest_name), &manifest_contents)?;
    println!(
        "sample: {} shots (seed {}), {} discarded",
        shots, seed, counts.discarded
    );
    println!("wrote {}, {} and {}", table_name, counts_name, manifest_name);
    Ok(())
}
