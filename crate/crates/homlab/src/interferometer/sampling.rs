//! Finite-shot multinomial sampling of outcome tables.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::interferometer::{OutcomeKey, OutcomeTable};

/// Counts from a finite-shot run over a table's outcomes. When the table's
/// probabilities sum below 1 (lossy setups), the deficit is an explicit
/// "discarded" pseudo-outcome. Σ counts + discarded = shots exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub shots: u64,
    pub counts: BTreeMap<OutcomeKey, u64>,
    pub discarded: u64,
}

impl CountTable {
    /// Total counts across real outcomes (excludes `discarded`).
    pub fn detected(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Draw a multinomial sample of `shots` events over the table's outcomes
/// plus the discarded pseudo-outcome. Deterministic in `seed`: identical
/// (table, shots, seed) triples give identical counts.
pub fn sample_counts(table: &OutcomeTable, shots: u64, seed: u64) -> Result<CountTable> {
    if shots == 0 {
        return Err(Error::InvalidState("shots must be at least 1".into()));
    }
    let total = table.total_probability();
    if !total.is_finite() || total > 1.0 + 1e-9 {
        return Err(Error::InconsistentTable(format!(
            "probabilities sum to {total}"
        )));
    }
    // Normalized event distribution: outcomes in key order, deficit last.
    let mass = total.max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining_shots = shots;
    let mut remaining_mass = 1.0f64;
    let mut counts = BTreeMap::new();
    for (key, &p) in table.iter() {
        if remaining_shots == 0 {
            counts.insert(*key, 0);
            continue;
        }
        let q = p / mass;
        let conditional = (q / remaining_mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining_shots, conditional)
            .map_err(|e| Error::InconsistentTable(format!("binomial draw failed: {e}")))?
            .sample(&mut rng);
        counts.insert(*key, draw);
        remaining_shots -= draw;
        remaining_mass = (remaining_mass - q).max(0.0);
    }
    Ok(CountTable {
        shots,
        counts,
        discarded: remaining_shots,
    })
}

/// Empirical frequency table: probability count/shots for every outcome of
/// `table`. The result feeds the same reconstruction routines as a
/// noiseless table.
pub fn empirical_table(table: &OutcomeTable, counts: &CountTable) -> Result<OutcomeTable> {
    for key in counts.counts.keys() {
        if table.probability(key).is_none() {
            return Err(Error::InconsistentTable(format!(
                "count key {key:?} absent from the source table"
            )));
        }
    }
    let shots = counts.shots as f64;
    let probabilities = table
        .keys()
        .map(|key| {
            let c = counts.counts.get(key).copied().unwrap_or(0);
            (*key, c as f64 / shots)
        })
        .collect();
    OutcomeTable::from_parts(
        table.grid(),
        table.statistics(),
        format!("{}+sampled", table.setup()),
        table.output_labels().to_vec(),
        probabilities,
    )
}
