//! Experiment runner behind the `circlaw` binary.
//!
//! A run reads a configuration file, executes one experiment kind with
//! independent seeded trials, and writes CSV, JSON and SVG artifacts plus a
//! `run.json` record. Identical configurations give byte-identical
//! artifacts regardless of the thread count.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiments;
pub mod svg;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use crate::artifacts::{sha256_hex, ArtifactWriter, OutputEntry};
use crate::config::{Kind, Settings, SCHEMA_VERSION};
use crate::error::{config_err, CliError, CliResult};
use crate::experiments::Context;

#[derive(Debug, Parser)]
#[command(name = "circlaw", version, about = "Sparse circular-law experiments")]
pub struct Cli {
    /// Experiment kind.
    #[arg(value_enum)]
    pub kind: Kind,
    /// Path of the `key = value` configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Overrides `threads`.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Contents of `run.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub kind: &'static str,
    /// SHA-256 of the canonical `key=value` text of the effective config.
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub master_seed: u64,
    pub trials: usize,
    /// Seed of each trial's generator.
    pub seeds: Vec<u64>,
    pub inputs: Vec<OutputEntry>,
    pub outputs: Vec<OutputEntry>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

/// Executes one run and returns its record. On failure every artifact the
/// run wrote is removed again.
pub fn run(cli: &Cli) -> CliResult<RunRecord> {
    let started = Instant::now();
    let mut settings = Settings::load(cli.kind, &cli.config)?;
    if let Some(s) = cli.seed {
        settings.set("seed", s);
    }
    if let Some(t) = cli.trials {
        settings.set("trials", t);
    }
    if let Some(t) = cli.threads {
        settings.set("threads", t);
    }
    let master_seed = settings.get_or("seed", 0u64)?;
    let trials = settings.get_or("trials", 1usize)?;
    let threads = settings.get_or("threads", 1usize)?;
    if trials == 0 {
        return Err(config_err("`trials` must be at least 1"));
    }
    if threads == 0 {
        return Err(config_err("`threads` must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| config_err(format!("cannot start {threads} threads: {e}")))?;
    let writer = ArtifactWriter::create(&cli.out)?;
    let mut ctx = Context::new(settings, master_seed, trials, pool, writer);
    if let Err(e) = experiments::dispatch(&mut ctx) {
        ctx.into_writer().discard();
        return Err(e);
    }
    let (settings, seeds, inputs, summary, mut writer) = ctx.finish();
    let record = RunRecord {
        tool: "circlaw",
        version: env!("CARGO_PKG_VERSION"),
        schema: SCHEMA_VERSION,
        kind: settings.kind.name(),
        config_hash: sha256_hex(settings.canonical_text().as_bytes()),
        config: settings.hashed_entries(),
        master_seed,
        trials,
        seeds,
        inputs,
        outputs: writer.outputs().to_vec(),
        summary,
    };
    let json = serde_json::to_string_pretty(&record).expect("run record serializes") + "\n";
    // Wall-clock time varies between reruns, so it lives outside run.json.
    let timing = format!(
        "wall_clock_seconds={:.3}\nthreads={threads}\n",
        started.elapsed().as_secs_f64()
    );
    if let Err(e) = writer
        .write("run.json", json.as_bytes())
        .and_then(|_| writer.write("timing.txt", timing.as_bytes()))
    {
        writer.discard();
        return Err(CliError::Io(e));
    }
    Ok(record)
}

/// Parses `args` (including the program name), runs, and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(rec) => {
            println!(
                "{} ok: {} artifacts in {}",
                rec.kind,
                rec.outputs.len(),
                cli.out.display()
            );
            0
        }
        Err(e) => {
            eprintln!("circlaw: {e}");
            e.exit_code()
        }
    }
}
