//! Manifests, setup descriptors, estimate files, and atomic output writing.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use homlab::interferometer::{CountTable, OutcomeTable};
use homlab::io::TransferMatrixFile;
use homlab::optics::TransferMatrix;
use homlab::tomography::{PureCandidates, RhoEstimate};
use homlab::{Grid, ModeLabel, ParticleStatistics, WaveFunction};

use crate::config::{PreparedRun, UnknownState};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridInfo {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceInfo {
    /// "flat" or "file".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// Everything a reconstruction needs to know about how a table was made.
/// A simulate manifest deserializes as a setup descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetupDescriptor {
    pub grid: GridInfo,
    /// "boson" or "fermion".
    pub statistics: String,
    /// "balanced", "polarization", "lossy", or "custom".
    pub setup: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub matrix: TransferMatrixFile,
    pub reference: ReferenceInfo,
}

impl SetupDescriptor {
    pub fn grid(&self) -> CliResult<Grid> {
        Grid::new(self.grid.n, self.grid.x_min, self.grid.x_max)
            .map_err(|e| CliError::config(e.to_string()))
    }

    pub fn statistics(&self) -> CliResult<ParticleStatistics> {
        match self.statistics.as_str() {
            "boson" => Ok(ParticleStatistics::Boson),
            "fermion" => Ok(ParticleStatistics::Fermion),
            other => Err(CliError::config(format!(
                "unknown statistics '{other}' in setup descriptor"
            ))),
        }
    }

    pub fn matrix(&self) -> CliResult<TransferMatrix> {
        self.matrix
            .clone()
            .into_matrix()
            .map_err(|e| CliError::physics(format!("setup matrix: {e}")))
    }

    /// Flat-reference amplitude; reconstruction formulas require the flat
    /// reference kind.
    pub fn flat_amplitude(&self) -> CliResult<f64> {
        if self.reference.kind != "flat" {
            return Err(CliError::physics(format!(
                "reconstruction requires the flat reference, this table used '{}'",
                self.reference.kind
            )));
        }
        self.reference
            .amplitude
            .filter(|c| *c > 0.0)
            .ok_or_else(|| CliError::config("setup descriptor lacks the reference amplitude"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub setup: SetupDescriptor,
    /// SHA-256 of the config file bytes.
    pub config_hash: String,
    pub total_probability: f64,
    pub max_coincidence_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discarded: Option<u64>,
    pub outputs: Vec<String>,
}

pub fn build_setup_descriptor(run: &PreparedRun) -> SetupDescriptor {
    SetupDescriptor {
        grid: GridInfo {
            n: run.grid.len(),
            x_min: run.grid.x_min(),
            x_max: run.grid.x_max(),
        },
        statistics: run.statistics.to_string(),
        setup: run.setup_kind.name().to_string(),
        eta: run.setup_kind.eta(),
        matrix: TransferMatrixFile::from_matrix(&run.matrix),
        reference: ReferenceInfo {
            kind: if run.reference.flat_amplitude.is_some() {
                "flat".to_string()
            } else {
                "file".to_string()
            },
            amplitude: run.reference.flat_amplitude,
            path: run.reference.path.clone(),
        },
    }
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Row-level JSON rendering of a table (the `--format json` alternative to
/// CSV).
#[derive(Debug, Serialize, Deserialize)]
pub struct TableJson {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub statistics: String,
    pub labels: Vec<String>,
    pub rows: Vec<TableRowJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discarded: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TableRowJson {
    pub alpha: String,
    pub beta: String,
    pub i: usize,
    pub j: usize,
    pub x_i: f64,
    pub x_j: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

pub fn table_json(table: &OutcomeTable, counts: Option<&CountTable>) -> TableJson {
    let labels: Vec<String> = table
        .output_labels()
        .iter()
        .map(ModeLabel::to_string)
        .collect();
    let grid = table.grid();
    let rows = table
        .iter()
        .map(|(key, &p)| {
            let (a, b) = (key.first(), key.second());
            TableRowJson {
                alpha: labels[a.mode].clone(),
                beta: labels[b.mode].clone(),
                i: a.pos,
                j: b.pos,
                x_i: grid.x(a.pos),
                x_j: grid.x(b.pos),
                p,
                count: counts.map(|c| c.counts.get(key).copied().unwrap_or(0)),
            }
        })
        .collect();
    TableJson {
        n: grid.len(),
        x_min: grid.x_min(),
        x_max: grid.x_max(),
        statistics: table.statistics().to_string(),
        labels,
        rows,
        shots: counts.map(|c| c.shots),
        discarded: counts.map(|c| c.discarded),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RhoDiagnosticsJson {
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub missing_components: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProjectedJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub projection_distance: f64,
}

/// JSON form of a mixed-state estimate, with the optional projected matrix.
#[derive(Debug, Serialize, Deserialize)]
pub struct RhoEstimateJson {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub re_present: bool,
    pub im_present: bool,
    pub physical: bool,
    pub diagnostics: RhoDiagnosticsJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projected: Option<ProjectedJson>,
}

pub fn rho_estimate_json(estimate: &RhoEstimate, project: bool) -> CliResult<RhoEstimateJson> {
    let n = estimate.grid().len();
    let diagnostics = estimate.diagnostics();
    let projected = if project && estimate.re_present() && estimate.im_present() {
        let assembled = estimate
            .to_density(true)
            .map_err(|e| CliError::physics(e.to_string()))?;
        let rho = &assembled.rho;
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(rho.get(i, j).re);
                im.push(rho.get(i, j).im);
            }
        }
        Some(ProjectedJson {
            re,
            im,
            min_eigenvalue: rho.min_eigenvalue(),
            trace: rho.trace().re,
            projection_distance: assembled.projection_distance,
        })
    } else {
        None
    };
    Ok(RhoEstimateJson {
        n,
        x_min: estimate.grid().x_min(),
        x_max: estimate.grid().x_max(),
        re: estimate.re_row_major(),
        im: estimate.im_row_major(),
        re_present: estimate.re_present(),
        im_present: estimate.im_present(),
        physical: estimate.is_physical(),
        diagnostics: RhoDiagnosticsJson {
            hermiticity_defect: diagnostics.hermiticity_defect,
            min_eigenvalue: diagnostics.min_eigenvalue,
            trace: diagnostics.trace,
            missing_components: estimate
                .missing_components()
                .iter()
                .map(|s| s.to_string())
                .collect(),
        },
        projected,
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WaveJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl WaveJson {
    pub fn from_state(state: &WaveFunction) -> Self {
        Self {
            re: state.amplitudes().iter().map(|z| z.re).collect(),
            im: state.amplitudes().iter().map(|z| z.im).collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PureDiagnosticsJson {
    pub masked_fraction: f64,
    /// Worst |cos(φ_i − φ_j) − measured| over unmasked pairs.
    pub cos_residual: f64,
    /// Worst |p_candidate − p_input| after re-simulating candidate 1.
    pub table_residual: f64,
}

/// JSON form of the conjugate candidate pair.
#[derive(Debug, Serialize, Deserialize)]
pub struct PureCandidatesJson {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub amplitude: Vec<f64>,
    pub candidates: Vec<WaveJson>,
    pub sign_ambiguous: bool,
    pub diagnostics: PureDiagnosticsJson,
}

pub fn pure_candidates_json(
    candidates: &PureCandidates,
    amplitude: &[f64],
    diagnostics: PureDiagnosticsJson,
) -> PureCandidatesJson {
    let grid = candidates.primary.grid();
    PureCandidatesJson {
        n: grid.len(),
        x_min: grid.x_min(),
        x_max: grid.x_max(),
        amplitude: amplitude.to_vec(),
        candidates: vec![
            WaveJson::from_state(&candidates.primary),
            WaveJson::from_state(&candidates.conjugate),
        ],
        sign_ambiguous: candidates.sign_ambiguous,
        diagnostics,
    }
}

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::physics(format!("cannot create {}: {e}", dir.display())))?;
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::config(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".tmp-{}", file_name.to_string_lossy()));
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::physics(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::physics(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::physics(format!("serialization failed: {e}")))
}

/// The unknown-state half of a run summary line.
pub fn describe_unknown(unknown: &UnknownState) -> String {
    match unknown {
        UnknownState::Pure(_) => "pure".to_string(),
        UnknownState::Mixed(_) => "mixed".to_string(),
    }
}
