//! Serializable experiment records.
//!
//! Records go out as JSON. `serde_json` prints floats in shortest
//! round-trip form, so equal values always give equal bytes. Non-finite
//! floats become `null`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Monte Carlo estimate of a lemma's event frequency next to its ceiling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRecord {
    pub lemma_id: String,
    pub params: Value,
    pub empirical_freq: f64,
    pub bound_value: f64,
    pub n_trials: usize,
    pub stderr: f64,
}

/// One trial of an experiment, written as a JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment_id: String,
    pub params: Value,
    pub seed: u64,
    pub outcome: Value,
    pub derived_quantities: Value,
}

/// Hit count of a Bernoulli event over independent trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub hits: usize,
    pub trials: usize,
    pub freq: f64,
    pub stderr: f64,
}

impl FrequencyEstimate {
    pub fn new(hits: usize, trials: usize) -> Self {
        let freq = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        Self {
            hits,
            trials,
            freq,
            stderr: bernoulli_stderr(freq, trials),
        }
    }

    /// Whether the estimate is consistent with `freq <= bound` at `k`
    /// standard errors.
    pub fn within(&self, bound: f64, k: f64) -> bool {
        self.freq <= bound + k * self.stderr
    }
}

/// `sqrt(p (1 - p) / n)`.
pub fn bernoulli_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// One compact JSON document per line, each line ending in `\n`.
pub fn to_json_lines<T: Serialize>(records: &[T]) -> serde_json::Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}
