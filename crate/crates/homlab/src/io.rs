//! File formats: JSON for states and matrices, CSV for outcome and count
//! tables.
//!
//! Floats in CSV are printed with 17 significant digits so tables round-trip
//! through text bit-exactly. Count CSVs append a `count` column and a
//! trailing `# discarded=<int> shots=<int>` comment line.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::interferometer::{CountTable, Detection, OutcomeKey, OutcomeTable};
use crate::modes::{canonical_output_labels, ModeLabel};
use crate::optics::TransferMatrix;
use crate::state::{ParticleStatistics, WaveFunction};

/// JSON form of a wave function:
/// `{"n":…, "x_min":…, "x_max":…, "re":[…], "im":[…]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveFunctionFile {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl WaveFunctionFile {
    pub fn from_state(state: &WaveFunction) -> Self {
        Self {
            n: state.len(),
            x_min: state.grid().x_min(),
            x_max: state.grid().x_max(),
            re: state.amplitudes().iter().map(|z| z.re).collect(),
            im: state.amplitudes().iter().map(|z| z.im).collect(),
        }
    }

    pub fn into_state(self) -> Result<WaveFunction> {
        let grid = Grid::new(self.n, self.x_min, self.x_max)?;
        if self.re.len() != self.n || self.im.len() != self.n {
            return Err(Error::Parse(format!(
                "wave function file declares n={} but carries {} re / {} im values",
                self.n,
                self.re.len(),
                self.im.len()
            )));
        }
        let amplitudes = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        WaveFunction::new(grid, amplitudes)
    }
}

/// JSON form of a density matrix with row-major n² component arrays and a
/// physicality flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub physical: bool,
}

impl DensityMatrixFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let n = rho.len();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(rho.get(i, j).re);
                im.push(rho.get(i, j).im);
            }
        }
        Self {
            n,
            x_min: rho.grid().x_min(),
            x_max: rho.grid().x_max(),
            re,
            im,
            physical: rho.is_physical(),
        }
    }

    /// Rebuild the matrix; a file claiming `physical: true` is validated
    /// and rejected if it is not.
    pub fn into_density(self) -> Result<DensityMatrix> {
        let grid = Grid::new(self.n, self.x_min, self.x_max)?;
        if self.re.len() != self.n * self.n || self.im.len() != self.n * self.n {
            return Err(Error::Parse(format!(
                "density file declares n={} but carries {} re / {} im values",
                self.n,
                self.re.len(),
                self.im.len()
            )));
        }
        let entries = DMatrix::from_fn(self.n, self.n, |i, j| {
            let idx = i * self.n + j;
            Complex64::new(self.re[idx], self.im[idx])
        });
        if self.physical {
            DensityMatrix::physical(grid, entries)
        } else {
            DensityMatrix::raw(grid, entries)
        }
    }
}

/// Mode labels of a matrix file: either one list applied to both sides or
/// explicit input/output lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixLabels {
    Single(Vec<String>),
    Split {
        inputs: Vec<String>,
        outputs: Vec<String>,
    },
}

/// JSON form of a transfer matrix:
/// `{"m":…, "re":[row-major], "im":[row-major], "labels": […]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferMatrixFile {
    pub m: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<MatrixLabels>,
}

impl TransferMatrixFile {
    pub fn from_matrix(u: &TransferMatrix) -> Self {
        let m = u.mode_count();
        let mut re = Vec::with_capacity(m * m);
        let mut im = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                re.push(u.entry(i, j).re);
                im.push(u.entry(i, j).im);
            }
        }
        Self {
            m,
            re,
            im,
            labels: Some(MatrixLabels::Split {
                inputs: u.input_labels().iter().map(|l| l.to_string()).collect(),
                outputs: u.output_labels().iter().map(|l| l.to_string()).collect(),
            }),
        }
    }

    pub fn into_matrix(self) -> Result<TransferMatrix> {
        if self.re.len() != self.m * self.m || self.im.len() != self.m * self.m {
            return Err(Error::Parse(format!(
                "matrix file declares m={} but carries {} re / {} im values",
                self.m,
                self.re.len(),
                self.im.len()
            )));
        }
        let entries = DMatrix::from_fn(self.m, self.m, |i, j| {
            let idx = i * self.m + j;
            Complex64::new(self.re[idx], self.im[idx])
        });
        let (inputs, outputs) = match self.labels {
            None => {
                let canonical = canonical_output_labels(self.m)?;
                (canonical.clone(), canonical)
            }
            Some(MatrixLabels::Single(list)) => {
                let parsed = parse_labels(&list, self.m)?;
                (parsed.clone(), parsed)
            }
            Some(MatrixLabels::Split { inputs, outputs }) => {
                (parse_labels(&inputs, self.m)?, parse_labels(&outputs, self.m)?)
            }
        };
        TransferMatrix::new(entries, inputs, outputs)
    }
}

fn parse_labels(list: &[String], m: usize) -> Result<Vec<ModeLabel>> {
    if list.len() != m {
        return Err(Error::Parse(format!(
            "expected {m} labels, got {}",
            list.len()
        )));
    }
    list.iter().map(|s| ModeLabel::from_str(s)).collect()
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header of every outcome CSV.
pub const OUTCOME_CSV_HEADER: &str = "alpha,beta,i,j,x_i,x_j,p";

/// Render a table as CSV: one row per ordered exclusive outcome,
/// probabilities with 17 significant digits.
pub fn outcome_table_to_csv(table: &OutcomeTable) -> String {
    let labels = table.output_labels();
    let grid = table.grid();
    let mut out = String::from(OUTCOME_CSV_HEADER);
    out.push('\n');
    for (key, &p) in table.iter() {
        let (a, b) = (key.first(), key.second());
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            labels[a.mode],
            labels[b.mode],
            a.pos,
            b.pos,
            fmt17(grid.x(a.pos)),
            fmt17(grid.x(b.pos)),
            fmt17(p)
        ));
    }
    out
}

/// Render a count table as CSV: the outcome rows with a trailing `count`
/// column, then a `# discarded=… shots=…` comment line.
pub fn count_table_to_csv(table: &OutcomeTable, counts: &CountTable) -> String {
    let labels = table.output_labels();
    let grid = table.grid();
    let mut out = String::from(OUTCOME_CSV_HEADER);
    out.push_str(",count\n");
    for (key, &p) in table.iter() {
        let (a, b) = (key.first(), key.second());
        let count = counts.counts.get(key).copied().unwrap_or(0);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            labels[a.mode],
            labels[b.mode],
            a.pos,
            b.pos,
            fmt17(grid.x(a.pos)),
            fmt17(grid.x(b.pos)),
            fmt17(p),
            count
        ));
    }
    out.push_str(&format!(
        "# discarded={} shots={}\n",
        counts.discarded, counts.shots
    ));
    out
}

struct ParsedRow {
    key: OutcomeKey,
    p: f64,
    count: Option<u64>,
}

/// Parsed data rows plus the optional `(discarded, shots)` footer.
type ParsedCsv = (Vec<ParsedRow>, Option<(u64, u64)>);

fn parse_rows(
    text: &str,
    grid: Grid,
    output_labels: &[ModeLabel],
) -> Result<ParsedCsv> {
    let label_index = |name: &str| -> Result<usize> {
        output_labels
            .iter()
            .position(|l| l.to_string() == name)
            .ok_or_else(|| Error::Parse(format!("unknown output mode label '{name}'")))
    };
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) if line.trim().is_empty() => continue,
            Some((_, line)) => break line.trim(),
            None => return Err(Error::Parse("empty table file".into())),
        }
    };
    let with_counts = match header {
        h if h == OUTCOME_CSV_HEADER => false,
        h if h == format!("{OUTCOME_CSV_HEADER},count") => true,
        other => return Err(Error::Parse(format!("unrecognized header '{other}'"))),
    };
    let mut rows = Vec::new();
    let mut footer = None;
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            footer = Some(parse_footer(comment, lineno + 1)?);
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = if with_counts { 8 } else { 7 };
        if fields.len() != expected {
            return Err(Error::Parse(format!(
                "line {}: expected {expected} fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad {what} '{s}'", lineno + 1)))
        };
        let parse_u = |s: &str, what: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {}: bad {what} '{s}'", lineno + 1)))
        };
        let mode_a = label_index(fields[0])?;
        let mode_b = label_index(fields[1])?;
        let i = parse_u(fields[2], "index i")?;
        let j = parse_u(fields[3], "index j")?;
        let x_i = parse_f(fields[4], "position x_i")?;
        let x_j = parse_f(fields[5], "position x_j")?;
        let p = parse_f(fields[6], "probability")?;
        if i >= grid.len() || j >= grid.len() {
            return Err(Error::IndexOutOfRange(format!(
                "line {}: position index outside the declared grid",
                lineno + 1
            )));
        }
        if (x_i - grid.x(i)).abs() > 1e-9 || (x_j - grid.x(j)).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "line {}: positions do not match the declared grid",
                lineno + 1
            )));
        }
        let count = if with_counts {
            Some(fields[7].parse::<u64>().map_err(|_| {
                Error::Parse(format!("line {}: bad count '{}'", lineno + 1, fields[7]))
            })?)
        } else {
            None
        };
        rows.push(ParsedRow {
            key: OutcomeKey::new(
                Detection {
                    mode: mode_a,
                    pos: i,
                },
                Detection {
                    mode: mode_b,
                    pos: j,
                },
            ),
            p,
            count,
        });
    }
    Ok((rows, footer))
}

fn parse_footer(comment: &str, lineno: usize) -> Result<(u64, u64)> {
    let mut discarded = None;
    let mut shots = None;
    for token in comment.split_whitespace() {
        if let Some(v) = token.strip_prefix("discarded=") {
            discarded = v.parse::<u64>().ok();
        } else if let Some(v) = token.strip_prefix("shots=") {
            shots = v.parse::<u64>().ok();
        }
    }
    match (discarded, shots) {
        (Some(d), Some(s)) => Ok((d, s)),
        _ => Err(Error::Parse(format!(
            "line {lineno}: malformed footer comment '{comment}'"
        ))),
    }
}

/// Parse an outcome CSV using grid, statistics and labels from a setup
/// descriptor.
pub fn outcome_table_from_csv(
    text: &str,
    grid: Grid,
    statistics: ParticleStatistics,
    output_labels: Vec<ModeLabel>,
    setup: String,
) -> Result<OutcomeTable> {
    let (rows, _) = parse_rows(text, grid, &output_labels)?;
    let mut probabilities = BTreeMap::new();
    for row in rows {
        probabilities.insert(row.key, row.p);
    }
    OutcomeTable::from_parts(grid, statistics, setup, output_labels, probabilities)
}

/// Parse a count CSV into the underlying probability table plus counts.
pub fn count_table_from_csv(
    text: &str,
    grid: Grid,
    statistics: ParticleStatistics,
    output_labels: Vec<ModeLabel>,
    setup: String,
) -> Result<(OutcomeTable, CountTable)> {
    let (rows, footer) = parse_rows(text, grid, &output_labels)?;
    let (discarded, shots) =
        footer.ok_or_else(|| Error::Parse("count CSV is missing the footer comment".into()))?;
    let mut probabilities = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for row in rows {
        probabilities.insert(row.key, row.p);
        counts.insert(
            row.key,
            row.count
                .ok_or_else(|| Error::Parse("row is missing a count".into()))?,
        );
    }
    let table = OutcomeTable::from_parts(grid, statistics, setup, output_labels, probabilities)?;
    let count_table = CountTable {
        shots,
        counts,
        discarded,
    };
    Ok((table, count_table))
}
