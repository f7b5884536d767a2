//! The seven experiment kinds and the context they share.

mod anticonc;
mod circular;
mod normals;
mod regimes;
mod report;
mod sample;
mod spectrum;

use circlaw_core::digraph::{sample_uniform, RegularDigraph, SampleMethod, SamplerOptions};
use circlaw_core::linalg::DEFAULT_SIZE_GUARD;
use circlaw_core::rng::{derive_seed, rng_from_seed};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::artifacts::{sha256_hex, ArtifactWriter, OutputEntry};
use crate::config::{Kind, Settings};
use crate::error::{config_err, CliResult};

pub struct Context {
    pub settings: Settings,
    pub master_seed: u64,
    pub trials: usize,
    pool: rayon::ThreadPool,
    writer: ArtifactWriter,
    inputs: Vec<OutputEntry>,
    summary: Map<String, Value>,
}

impl Context {
    pub fn new(
        settings: Settings,
        master_seed: u64,
        trials: usize,
        pool: rayon::ThreadPool,
        writer: ArtifactWriter,
    ) -> Self {
        Self {
            settings,
            master_seed,
            trials,
            pool,
            writer,
            inputs: Vec::new(),
            summary: Map::new(),
        }
    }

    /// Seed of trial `t`.
    pub fn trial_seed(&self, t: usize) -> u64 {
        derive_seed(self.master_seed, t as u64)
    }

    /// Seed of a stream shared by all trials, such as a fixed subspace.
    pub fn setup_seed(&self) -> u64 {
        derive_seed(self.master_seed, u64::MAX)
    }

    /// Runs `f(0), ..., f(count - 1)` on the pool. Results come back in
    /// index order, and the reported error is the one with the lowest index.
    pub fn par_map<T, F>(&self, count: usize, f: F) -> CliResult<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> CliResult<T> + Sync + Send,
    {
        let results: Vec<CliResult<T>> = self.pool.install(|| (0..count).into_par_iter().map(&f).collect());
        results.into_iter().collect()
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> CliResult<()> {
        Ok(self.writer.write(name, bytes.as_ref())?)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).expect("artifact serializes") + "\n";
        self.write(name, text)
    }

    pub fn summarize(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).expect("summary serializes"),
        );
    }

    pub fn add_input(&mut self, path: &str, bytes: &[u8]) {
        self.inputs.push(OutputEntry {
            path: path.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
    }

    pub fn into_writer(self) -> ArtifactWriter {
        self.writer
    }

    pub fn finish(self) -> (Settings, Vec<u64>, Vec<OutputEntry>, Map<String, Value>, ArtifactWriter) {
        let seeds = (0..self.trials).map(|t| self.trial_seed(t)).collect();
        (self.settings, seeds, self.inputs, self.summary, self.writer)
    }
}

pub fn dispatch(ctx: &mut Context) -> CliResult<()> {
    match ctx.settings.kind {
        Kind::Sample => sample::run(ctx),
        Kind::Spectrum => spectrum::run(ctx),
        Kind::CircularLaw => circular::run(ctx),
        Kind::SvRegimes => regimes::run(ctx),
        Kind::Normals => normals::run(ctx),
        Kind::Anticonc => anticonc::run(ctx),
        Kind::Report => report::run(ctx),
    }
}

/// `(n, d)` and sampler options shared by the sampling experiments.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Ensemble {
    pub n: usize,
    pub d: usize,
    pub opts: SamplerOptions,
}

impl Ensemble {
    pub fn from_settings(s: &Settings) -> CliResult<Self> {
        let n: usize = s.require("n")?;
        let d: usize = s.require("d")?;
        if n == 0 || d == 0 || d > n {
            return Err(config_err(format!("need 1 <= d <= n, got n = {n}, d = {d}")));
        }
        if n > DEFAULT_SIZE_GUARD {
            return Err(config_err(format!(
                "n = {n} exceeds the dense limit {DEFAULT_SIZE_GUARD}"
            )));
        }
        let max_attempts = s.get_or("max_attempts", SamplerOptions::default().max_attempts)?;
        let burn_in_accepted = s.get("burn_in")?;
        Ok(Self {
            n,
            d,
            opts: SamplerOptions {
                max_attempts,
                burn_in_accepted,
            },
        })
    }

    pub fn sample(&self, seed: u64) -> CliResult<(RegularDigraph, SampleMethod)> {
        Ok(sample_uniform(self.n, self.d, &mut rng_from_seed(seed), &self.opts)?)
    }
}

pub(crate) fn method_name(m: &SampleMethod) -> &'static str {
    match m {
        SampleMethod::Exact { .. } => "exact",
        SampleMethod::SwitchChain { .. } => "switch-chain",
    }
}

pub(crate) fn positive(s: &Settings, key: &str, default: f64) -> CliResult<f64> {
    let v = s.get_or(key, default)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(config_err(format!("`{key}` must be positive, got {v}")));
    }
    Ok(v)
}

pub(crate) fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, k) = xs.into_iter().fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        f64::NAN
    } else {
        s / k as f64
    }
}
