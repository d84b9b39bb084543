//! Batch front door for the homlab toolkit: simulate, sample, reconstruct,
//! roundtrip, and check-matrix.
//!
//! Exit codes: 0 success (roundtrip pass), 1 roundtrip failure, 2 invalid
//! configuration or malformed input files, 3 inconsistent physics or a
//! setup/table mismatch. Failure paths write no output files; all outputs
//! are written atomically (temp file + rename).

mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Configuration/usage errors exit with 2, physics mismatches with 3.
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn physics(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "homlab",
    about = "Two-particle interference simulator and state tomography toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReconstructMode {
    Pure,
    MixedReal,
    MixedLossy,
    MixedPolarization,
    MixedCombined,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    #[value(alias = "four_detector")]
    FourDetector,
    #[value(alias = "three_detector")]
    ThreeDetector,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Pure,
    Polarization,
    ReImCombined,
    LossySingle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticsArg {
    Boson,
    Fermion,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an outcome table from a run configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the table and manifest.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Simulate and draw a finite-shot multinomial sample.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Invert an outcome or count table into a state estimate.
    Reconstruct {
        #[arg(long, value_enum)]
        mode: ReconstructMode,
        /// Outcome or count CSV produced by simulate/sample.
        #[arg(long)]
        table: PathBuf,
        /// Setup descriptor JSON (a simulate manifest works).
        #[arg(long)]
        setup: PathBuf,
        /// Second table for mixed-combined: the imaginary-part source.
        #[arg(long)]
        table_im: Option<PathBuf>,
        /// Setup descriptor for --table-im.
        #[arg(long)]
        setup_im: Option<PathBuf>,
        /// Polarization readout variant (mixed-polarization only).
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Skip the positive-semidefinite projection of mixed estimates.
        #[arg(long)]
        no_project: bool,
        /// Branch-sign consistency tolerance for pure reconstruction;
        /// raise it for count tables.
        #[arg(long)]
        phase_tol: Option<f64>,
    },
    /// Simulate, reconstruct, and compare against the known input state.
    Roundtrip {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = StatisticsArg::Boson)]
        statistics: StatisticsArg,
    },
    /// Print the exchange products and phase classification of a matrix.
    CheckMatrix {
        /// Matrix JSON file ({"m":…, "re":[…], "im":[…], "labels":…}).
        #[arg(long, conflicts_with = "config")]
        matrix: Option<PathBuf>,
        /// Run configuration whose setup matrix should be checked.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("HOMLAB_THREADS") {
        match value.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid HOMLAB_THREADS value '{value}'"),
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            format,
        } => commands::simulate::run(&config, &out, format),
        Command::Sample {
            config,
            out,
            format,
            shots,
            seed,
        } => commands::sample::run(&config, &out, format, shots, seed),
        Command::Reconstruct {
            mode,
            table,
            setup,
            table_im,
            setup_im,
            variant,
            out,
            no_project,
            phase_tol,
        } => commands::reconstruct::run(commands::reconstruct::Args {
            mode,
            table,
            setup,
            table_im,
            setup_im,
            variant,
            out,
            project: !no_project,
            phase_tol,
        }),
        Command::Roundtrip {
            scheme,
            seed,
            statistics,
        } => commands::roundtrip::run(scheme, seed, statistics),
        Command::CheckMatrix { matrix, config } => {
            commands::check_matrix::run(matrix.as_deref(), config.as_deref())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    init_thread_pool();
    if let Err(err) = run(cli) {
        eprintln!("error: {}", err.message);
        std::process::exit(err.code);
    }
}
