use std::fmt::Write as _;

use circlaw_core::anticonc::{
    coupling_experiment, default_l, row_distance_experiment, smallball_experiment, support_union, sv_from_distances,
    uniform_support_check, ResamplerSpec, RowDistanceParams, SmallBallParams, XSamplerOptions,
};
use circlaw_core::digraph::restricted_search_size;
use circlaw_core::hermitization::{build_shifted, ShiftSpec};
use circlaw_core::linalg::{leave_one_out_distances, singular_values, OrthoBasis};
use circlaw_core::normals::{random_normal, sample_gaussian};
use circlaw_core::record::{to_json_lines, ExperimentRecord};
use circlaw_core::rng::{derive_seed, rng_from_seed};
use circlaw_core::Complex64;
use serde_json::{json, Value};

use super::{positive, Context, Ensemble};
use crate::config::parse_complex;
use crate::error::{config_err, CliResult};

const EXPERIMENTS: [&str; 6] = [
    "disjointness",
    "support-check",
    "coupling",
    "smallball",
    "row-distance",
    "step-two",
];

/// Boolean outcome field tallied in the summary table for each experiment.
fn flag(experiment: &str) -> &'static str {
    match experiment {
        "disjointness" => "disjoint",
        "support-check" => "equinumerous",
        "coupling" => "within_bound",
        "smallball" => "below_ceiling",
        "row-distance" => "violated",
        _ => "implication_holds",
    }
}

struct Knobs {
    ens: Ensemble,
    z: Complex64,
    experiments: Vec<String>,
    s_size: usize,
    coupling_draws: usize,
    smallball_draws: usize,
    rho: f64,
    delta: f64,
    step_rho: Option<f64>,
    row: RowDistanceParams,
    row_index: usize,
    xopts: XSamplerOptions,
}

fn knobs(ctx: &Context) -> CliResult<Knobs> {
    let s = &ctx.settings;
    let ens = Ensemble::from_settings(s)?;
    if ens.n < 2 {
        return Err(config_err("anticoncentration experiments need n >= 2"));
    }
    let experiments: Vec<String> = s
        .list("experiments")?
        .unwrap_or_else(|| EXPERIMENTS.iter().map(|e| e.to_string()).collect());
    if let Some(bad) = experiments.iter().find(|e| !EXPERIMENTS.contains(&e.as_str())) {
        return Err(config_err(format!(
            "unknown experiment `{bad}`; expected one of {}",
            EXPERIMENTS.join(", ")
        )));
    }
    let z = match s.raw("z") {
        Some(v) => parse_complex(v).ok_or_else(|| config_err(format!("bad complex `{v}` for `z`")))?,
        None => Complex64::new(0.0, 0.0),
    };
    let s_size: usize = s.get_or("s_size", 64)?;
    if s_size < ens.d {
        return Err(config_err(format!("need s_size >= d, got {s_size}")));
    }
    let delta = positive(s, "delta", 0.05)?;
    if delta > 0.5 {
        return Err(config_err(format!("`delta` must be at most 1/2, got {delta}")));
    }
    let step_rho = match s.raw("step_rho").unwrap_or("auto") {
        "auto" => None,
        _ => Some(positive(s, "step_rho", 1.0)?),
    };
    let row_index: usize = s.get_or("row_index", (ens.n / 2).max(1))?;
    if row_index == 0 || row_index > ens.n {
        return Err(config_err(format!("`row_index` must lie in 1..={}", ens.n)));
    }
    Ok(Knobs {
        z,
        experiments,
        s_size,
        coupling_draws: s.get_or("coupling_draws", 10_000)?,
        smallball_draws: s.get_or("smallball_draws", 200)?,
        rho: positive(s, "rho", 1.0)?,
        delta,
        step_rho,
        row: RowDistanceParams {
            c_const: positive(s, "c_const", 1.0)?,
            gamma: positive(s, "gamma", 1.0 / 288.0)?,
            sampler: ens.opts,
        },
        row_index,
        xopts: XSamplerOptions {
            exact_budget: s.get_or("exact_budget", XSamplerOptions::default().exact_budget)?,
            ..XSamplerOptions::default()
        },
        ens,
    })
}

fn record(id: &str, params: Value, seed: u64, outcome: Value, derived: Value) -> ExperimentRecord {
    ExperimentRecord {
        experiment_id: id.to_string(),
        params,
        seed,
        outcome,
        derived_quantities: derived,
    }
}

fn trial_records(k: &Knobs, seed: u64) -> CliResult<Vec<ExperimentRecord>> {
    let (n, d) = (k.ens.n, k.ens.d);
    let (a, _) = k.ens.sample(seed)?;
    let mut aux = rng_from_seed(derive_seed(seed, 0));
    let j: Vec<usize> = (0..n.div_ceil(2)).collect();
    let u = n - 1;
    let spec = ResamplerSpec::with_random_i0(a.clone(), j.clone(), u, &mut aux)?;
    let free = spec.free_rows();
    let base = json!({"n": n, "d": d, "u": u, "j_size": j.len(), "i0": spec.i0()});
    let mut out = Vec::new();
    for e in &k.experiments {
        let rec = match e.as_str() {
            "disjointness" => {
                let s = support_union(&a, &free);
                let disjoint = s.len() == free.len() * d;
                record(
                    e,
                    base.clone(),
                    seed,
                    json!({"disjoint": disjoint}),
                    json!({"s_size": s.len()}),
                )
            }
            "support-check" => {
                let size = restricted_search_size(&a, &free);
                if size <= k.xopts.exact_budget {
                    let chk = uniform_support_check(&spec)?;
                    record(
                        e,
                        base.clone(),
                        seed,
                        json!({
                            "hypothesis_holds": chk.hypothesis_holds,
                            "equinumerous": chk.equinumerous,
                            "subsets": chk.subsets,
                            "realized": chk.counts.len(),
                            "total": chk.total,
                        }),
                        json!({"implication_holds": !chk.hypothesis_holds || chk.equinumerous, "search_size": size}),
                    )
                } else {
                    record(
                        e,
                        base.clone(),
                        seed,
                        json!({"skipped": "search-size"}),
                        json!({"search_size": size}),
                    )
                }
            }
            "smallball" => {
                let b = build_shifted(&a, &ShiftSpec::normalized(k.z, d)?);
                let rows = b.row_vectors();
                let span: Vec<Vec<Complex64>> = j.iter().map(|&r| rows[r].clone()).collect();
                let basis = OrthoBasis::from_rows(n, &span)?;
                let y = random_normal(&basis, &sample_gaussian(n, &mut aux))?;
                let params = SmallBallParams {
                    rho: k.rho,
                    lambda: Complex64::new(0.0, 0.0),
                    j_tilde: Vec::new(),
                    delta: k.delta,
                };
                let rep = smallball_experiment(&y, &spec, &params, k.smallball_draws, derive_seed(seed, 1), &k.xopts)?;
                record(
                    e,
                    json!({"n": n, "d": d, "rho": k.rho, "delta": k.delta, "draws": k.smallball_draws, "i0": spec.i0()}),
                    seed,
                    json!({
                        "freq": rep.hits.freq,
                        "stderr": rep.hits.stderr,
                        "ceiling": rep.ceiling,
                        "below_ceiling": rep.hits.within(rep.ceiling, 3.0),
                        "hypothesis": rep.hypothesis,
                    }),
                    json!({"exact_sampler": rep.exact_sampler}),
                )
            }
            "row-distance" => {
                let r = row_distance_experiment(n, d, k.z, k.row_index, 1, seed, &k.row)?.remove(0);
                record(
                    e,
                    json!({"n": n, "d": d, "z": k.z, "i": k.row_index, "c_const": r.c_const, "gamma": r.gamma}),
                    seed,
                    json!({"distance": r.distance, "threshold": r.threshold, "violated": r.violated}),
                    json!({"sample": r.sample}),
                )
            }
            "step-two" => {
                let b = build_shifted(&a, &ShiftSpec::normalized(k.z, d)?);
                let dist = leave_one_out_distances(&b)?;
                let svals = singular_values(&b)?;
                let l = default_l(k.row.c_const, k.delta).clamp(1.0, 1.0 / (2.0 * k.delta));
                let rho = match k.step_rho {
                    Some(r) => r,
                    None => {
                        let mut sorted = dist.clone();
                        sorted.sort_by(f64::total_cmp);
                        let at = ((l * k.delta * n as f64).floor() as usize).min(n - 1);
                        // A zero distance cannot serve as a radius.
                        sorted[at].max(f64::MIN_POSITIVE)
                    }
                };
                let v = sv_from_distances(rho, k.delta, l, n, &dist, &svals)?;
                record(
                    e,
                    json!({"n": n, "d": d, "z": k.z, "rho": rho, "delta": k.delta, "L": l, "m": n}),
                    seed,
                    json!({"premise": v.premise, "conclusion": v.conclusion, "implication_holds": v.implication_holds}),
                    serde_json::to_value(&v).expect("verdict serializes"),
                )
            }
            _ => continue,
        };
        out.push(rec);
    }
    Ok(out)
}

/// Anticoncentration experiments on the resampled row `u`, one record per
/// experiment and trial, plus a single coupling record.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let k = knobs(ctx)?;
    let per_trial = ctx.par_map(ctx.trials, |t| trial_records(&k, ctx.trial_seed(t)))?;
    let mut records = Vec::new();
    for e in &k.experiments {
        if e == "coupling" {
            let seed = ctx.setup_seed();
            let rep = coupling_experiment(k.s_size, k.ens.d, k.coupling_draws, seed)?;
            records.push(record(
                e,
                json!({"s_size": k.s_size, "d": k.ens.d, "draws": k.coupling_draws}),
                seed,
                json!({
                    "collisions": rep.collisions.hits,
                    "freq": rep.collisions.freq,
                    "stderr": rep.collisions.stderr,
                    "within_bound": rep.collisions.within(rep.bound, 3.0),
                }),
                json!({"bound": rep.bound}),
            ));
            continue;
        }
        records.extend(per_trial.iter().flatten().filter(|r| &r.experiment_id == e).cloned());
    }

    let mut table = String::from("experiment_id,records,flag,flag_true\n");
    for e in &k.experiments {
        let f = flag(e);
        let rows: Vec<&ExperimentRecord> = records.iter().filter(|r| &r.experiment_id == e).collect();
        let hits = rows
            .iter()
            .filter(|r| r.outcome.get(f).or_else(|| r.derived_quantities.get(f)) == Some(&Value::Bool(true)))
            .count();
        let _ = writeln!(table, "{e},{},{f},{hits}", rows.len());
    }
    let lines = to_json_lines(&records).map_err(|e| config_err(format!("cannot encode records: {e}")))?;
    ctx.write("anticonc.jsonl", lines)?;
    ctx.write("anticonc_summary.csv", table)?;
    ctx.summarize("records", records.len());
    Ok(())
}
