//! Run configuration: JSON schema, validation, and construction of the
//! domain objects a run needs.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use homlab::io::{DensityMatrixFile, TransferMatrixFile, WaveFunctionFile};
use homlab::optics::{self, TransferMatrix};
use homlab::{DensityMatrix, Error, Grid, ParticleStatistics, WaveFunction};

use crate::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub statistics: StatisticsConfig,
    pub setup: SetupConfig,
    pub unknown: UnknownConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticsConfig {
    Boson,
    Fermion,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupConfig {
    Balanced,
    Polarization,
    Lossy { eta: f64 },
    Custom { matrix: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownConfig {
    Pure(PureSource),
    Mixed(MixedSource),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PureSource {
    File(PathBuf),
    Builtin(BuiltinPure),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinPure {
    Gaussian { center: f64, width: f64 },
    Ramp { k: f64 },
    Random { seed: u64 },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedSource {
    File(PathBuf),
    Random { rank: usize, seed: u64 },
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceConfig {
    #[default]
    Flat,
    File(PathBuf),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub table: Option<String>,
    pub counts: Option<String>,
    pub manifest: Option<String>,
}

/// Everything a simulation run needs, built and validated from a config.
pub struct PreparedRun {
    pub grid: Grid,
    pub statistics: ParticleStatistics,
    pub setup_kind: SetupKind,
    pub matrix: TransferMatrix,
    pub unknown: UnknownState,
    pub reference: ReferenceState,
    pub output: OutputNames,
    pub config_bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetupKind {
    Balanced,
    Polarization,
    Lossy { eta: f64 },
    Custom,
}

impl SetupKind {
    pub fn name(&self) -> &'static str {
        match self {
            SetupKind::Balanced => "balanced",
            SetupKind::Polarization => "polarization",
            SetupKind::Lossy { .. } => "lossy",
            SetupKind::Custom => "custom",
        }
    }

    pub fn eta(&self) -> Option<f64> {
        match self {
            SetupKind::Lossy { eta } => Some(*eta),
            _ => None,
        }
    }
}

pub enum UnknownState {
    Pure(WaveFunction),
    Mixed(DensityMatrix),
}

pub struct ReferenceState {
    pub state: WaveFunction,
    /// Flat amplitude 1/√n when the reference is flat; None for file-based
    /// references (reconstruction formulas require the flat kind).
    pub flat_amplitude: Option<f64>,
    pub path: Option<String>,
}

pub struct OutputNames {
    pub table: String,
    pub counts: String,
    pub manifest: String,
}

/// Read and parse a config file; parse errors carry line/column positions.
pub fn load_config(path: &Path) -> CliResult<(RunConfig, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_slice(&bytes).map_err(|e| {
        CliError::config(format!(
            "config {} line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    Ok((config, bytes))
}

/// Validate a parsed config and build the run objects. Paths inside the
/// config are resolved relative to the config file's directory.
pub fn prepare(config: RunConfig, config_bytes: Vec<u8>, config_dir: &Path) -> CliResult<PreparedRun> {
    let grid = Grid::new(config.grid.n, config.grid.x_min, config.grid.x_max)
        .map_err(|e| CliError::config(e.to_string()))?;
    let statistics = match config.statistics {
        StatisticsConfig::Boson => ParticleStatistics::Boson,
        StatisticsConfig::Fermion => ParticleStatistics::Fermion,
    };

    let (setup_kind, matrix) = match &config.setup {
        SetupConfig::Balanced => (SetupKind::Balanced, optics::balanced_splitter()),
        SetupConfig::Polarization => (SetupKind::Polarization, optics::polarization_network()),
        SetupConfig::Lossy { eta } => {
            if !(0.0..=1.0).contains(eta) {
                return Err(CliError::config(format!(
                    "lossy setup needs 0 <= eta <= 1, got {eta}"
                )));
            }
            (
                SetupKind::Lossy { eta: *eta },
                optics::lossy_tomography_matrix(*eta)
                    .map_err(|e| CliError::config(e.to_string()))?,
            )
        }
        SetupConfig::Custom { matrix } => {
            let path = config_dir.join(matrix);
            let file: TransferMatrixFile = read_json(&path)?;
            let u = file
                .into_matrix()
                .map_err(|e| classify(e, &path))?;
            if u.mode_count() != 2 {
                return Err(CliError::config(format!(
                    "custom matrices must be two-port; the four-mode network is \
                     available as setup \"polarization\" ({} has m={})",
                    path.display(),
                    u.mode_count()
                )));
            }
            (SetupKind::Custom, u)
        }
    };

    let unknown = match &config.unknown {
        UnknownConfig::Pure(source) => UnknownState::Pure(load_pure(source, grid, config_dir)?),
        UnknownConfig::Mixed(source) => {
            UnknownState::Mixed(load_mixed(source, grid, config_dir)?)
        }
    };

    let reference = match &config.reference {
        ReferenceConfig::Flat => ReferenceState {
            state: WaveFunction::flat(grid),
            flat_amplitude: Some(WaveFunction::flat_amplitude(grid)),
            path: None,
        },
        ReferenceConfig::File(path) => {
            if matches!(setup_kind, SetupKind::Polarization) {
                return Err(CliError::config(
                    "the polarization setup uses the flat reference; \
                     a reference file cannot be supplied",
                ));
            }
            let full = config_dir.join(path);
            let file: WaveFunctionFile = read_json(&full)?;
            let state = file.into_state().map_err(|e| classify(e, &full))?;
            if state.grid() != grid {
                return Err(CliError::config(format!(
                    "reference file {} does not match the configured grid",
                    full.display()
                )));
            }
            let norm = state.norm_sqr();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(CliError::physics(format!(
                    "reference file {} is not normalized: |psi|^2 = {norm}",
                    full.display()
                )));
            }
            ReferenceState {
                state: state.normalized().map_err(|e| CliError::physics(e.to_string()))?,
                flat_amplitude: None,
                path: Some(path.display().to_string()),
            }
        }
    };

    let output = OutputNames {
        table: config.output.table.clone().unwrap_or_default(),
        counts: config.output.counts.clone().unwrap_or_default(),
        manifest: config
            .output
            .manifest
            .clone()
            .unwrap_or_else(|| "manifest.json".to_string()),
    };

    Ok(PreparedRun {
        grid,
        statistics,
        setup_kind,
        matrix,
        unknown,
        reference,
        output,
        config_bytes,
    })
}

fn load_pure(source: &PureSource, grid: Grid, dir: &Path) -> CliResult<WaveFunction> {
    match source {
        PureSource::File(path) => {
            let full = dir.join(path);
            let file: WaveFunctionFile = read_json(&full)?;
            let state = file.into_state().map_err(|e| classify(e, &full))?;
            if state.grid() != grid {
                return Err(CliError::config(format!(
                    "state file {} does not match the configured grid",
                    full.display()
                )));
            }
            let norm = state.norm_sqr();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(CliError::physics(format!(
                    "state file {} is not normalized: |psi|^2 = {norm}",
                    full.display()
                )));
            }
            state
                .normalized()
                .map_err(|e| CliError::physics(e.to_string()))
        }
        PureSource::Builtin(BuiltinPure::Gaussian { center, width }) => {
            if !(*center >= grid.x_min() && *center <= grid.x_max()) {
                return Err(CliError::config(format!(
                    "gaussian center {center} outside the grid window [{}, {}]",
                    grid.x_min(),
                    grid.x_max()
                )));
            }
            WaveFunction::gaussian(grid, *center, *width)
                .map_err(|e| CliError::config(e.to_string()))
        }
        PureSource::Builtin(BuiltinPure::Ramp { k }) => {
            if !k.is_finite() {
                return Err(CliError::config(format!("ramp wavenumber {k} not finite")));
            }
            Ok(WaveFunction::phase_ramp(grid, *k))
        }
        PureSource::Builtin(BuiltinPure::Random { seed }) => {
            Ok(WaveFunction::random(grid, *seed))
        }
    }
}

fn load_mixed(source: &MixedSource, grid: Grid, dir: &Path) -> CliResult<DensityMatrix> {
    match source {
        MixedSource::File(path) => {
            let full = dir.join(path);
            let file: DensityMatrixFile = read_json(&full)?;
            let rho = file.into_density().map_err(|e| classify(e, &full))?;
            if rho.grid() != grid {
                return Err(CliError::config(format!(
                    "density file {} does not match the configured grid",
                    full.display()
                )));
            }
            if !rho.is_physical() {
                return Err(CliError::physics(format!(
                    "density file {} is not flagged physical",
                    full.display()
                )));
            }
            Ok(rho)
        }
        MixedSource::Random { rank, seed } => DensityMatrix::random(grid, *rank, *seed)
            .map_err(|e| CliError::config(e.to_string())),
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| {
        CliError::config(format!(
            "{} line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

/// Physics-level validation failures exit 3; structural ones exit 2.
fn classify(err: Error, path: &Path) -> CliError {
    let message = format!("{}: {err}", path.display());
    match err {
        Error::NonPhysical(_) | Error::InvalidMatrix(_) => CliError::physics(message),
        _ => CliError::config(message),
    }
}
