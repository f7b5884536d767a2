use std::collections::BTreeMap;
use std::fmt::Write as _;

use circlaw_core::hermitization::{build_shifted, ShiftSpec};
use circlaw_core::linalg::OrthoBasis;
use circlaw_core::normals::{
    build_clusters, classify_normal, orderstat_experiments, pair_sigma, plane_partition_cell, random_normal,
    sample_gaussian, OrderStatGrid, PlaneCell, StructureLabel, StructureParams,
};
use circlaw_core::record::{FrequencyEstimate, LemmaRecord};
use circlaw_core::rng::rng_from_seed;
use circlaw_core::Complex64;
use serde_json::json;

use super::{positive, Context, Ensemble};
use crate::config::parse_complex;
use crate::error::{config_err, CliResult};

const LINE_T: [f64; 3] = [0.5, 1.0, 2.0];

/// Random normals `Y = P_{E^perp} G` to the span `E` of the first `k` rows
/// of a sampled `B_z`: order-statistic and Gaussian-law records,
/// correlation clusters, structure labels and the plane partition.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let s = &ctx.settings;
    let ens = Ensemble::from_settings(s)?;
    let n = ens.n;
    let k: usize = s.get_or("k", n / 2)?;
    if k >= n {
        return Err(config_err(format!("need k < n, got k = {k}")));
    }
    let z = match s.raw("z") {
        Some(v) => parse_complex(v).ok_or_else(|| config_err(format!("bad complex `{v}` for `z`")))?,
        None => Complex64::new(0.0, 0.0),
    };
    let defaults = OrderStatGrid::default();
    let grid = OrderStatGrid {
        small_c: s.list("small_c")?.unwrap_or(defaults.small_c),
        large_c: s.list("large_c")?.unwrap_or(defaults.large_c),
        indices: s.list("indices")?.unwrap_or(defaults.indices),
    };
    let alpha = positive(s, "alpha", 0.5)?;
    let beta = positive(s, "beta", 0.25)?;
    if beta > 0.5 {
        return Err(config_err(format!("`beta` must lie in (0, 1/2], got {beta}")));
    }
    let ic_size: usize = s.get_or("ic_size", (n / 4).max(2))?;
    let structure = StructureParams {
        a: positive(s, "a", StructureParams::default().a)?,
        gamma: positive(s, "gamma", StructureParams::default().gamma)?,
    };
    if !((structure.a * ic_size as f64).floor() >= 1.0 && ic_size <= n) {
        return Err(config_err(format!(
            "need 1 <= a * ic_size and ic_size <= n, got a = {}, ic_size = {ic_size}",
            structure.a
        )));
    }
    let rho = positive(s, "rho", 0.5)?;
    if n < 2 {
        return Err(config_err("normals need n >= 2"));
    }

    let (a, _) = ens.sample(ctx.setup_seed())?;
    let b = build_shifted(&a, &ShiftSpec::normalized(z, ens.d)?);
    let basis = OrthoBasis::from_rows(n, &b.row_vectors()[..k])?;

    let mut records = orderstat_experiments(&basis, ctx.trials, ctx.master_seed, &grid)?;
    // Trial t reuses the Gaussian vector the order-statistic trial t drew.
    let ys = ctx.par_map(ctx.trials, |t| {
        let g = sample_gaussian(n, &mut rng_from_seed(ctx.trial_seed(t)));
        Ok(random_normal(&basis, &g)?)
    })?;

    // A unit vector of E^perp: <Y, v> is then a standard complex Gaussian.
    let v = (0..n)
        .find_map(|i| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[i] = Complex64::new(1.0, 0.0);
            let p = basis.project_complement(&e).ok()?;
            let norm = p.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-8).then(|| p.into_iter().map(|x| x / norm).collect::<Vec<_>>())
        })
        .ok_or_else(|| config_err("E spans the whole space"))?;
    for &t in &LINE_T {
        let hits = ys
            .iter()
            .filter(|y| {
                v.iter()
                    .zip(y.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum::<Complex64>()
                    .norm()
                    <= t
            })
            .count();
        let est = FrequencyEstimate::new(hits, ctx.trials);
        records.push(LemmaRecord {
            lemma_id: "line-projection".into(),
            params: json!({"n": n, "k": k, "t": t}),
            empirical_freq: est.freq,
            bound_value: 1.0 - (-t * t).exp(),
            n_trials: ctx.trials,
            stderr: est.stderr,
        });
    }
    let sigma = pair_sigma(&basis, 0, 1)?;
    let hits = ys.iter().filter(|y| (y[0] - y[1]).norm() >= alpha).count();
    let est = FrequencyEstimate::new(hits, ctx.trials);
    records.push(LemmaRecord {
        lemma_id: "pair-increment".into(),
        params: json!({"n": n, "k": k, "i": 0, "j": 1, "alpha": alpha, "sigma": sigma}),
        empirical_freq: est.freq,
        bound_value: if sigma > 0.0 {
            (-(alpha * alpha) / (sigma * sigma)).exp()
        } else {
            0.0
        },
        n_trials: ctx.trials,
        stderr: est.stderr,
    });

    let clusters = build_clusters(&basis, alpha, beta)?;
    let mut cl_csv = String::from("cluster,anchor,size,members\n");
    for (c, (anchor, members)) in clusters.anchors.iter().zip(&clusters.clusters).enumerate() {
        let list: Vec<String> = members.iter().map(usize::to_string).collect();
        let _ = writeln!(cl_csv, "{c},{anchor},{},{}", members.len(), list.join(" "));
    }

    let mut labels: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut st_csv =
        String::from("trial,label,index,ratio,decay_margin,level_lower,level_upper,level_bound,undecided\n");
    for (t, y) in ys.iter().enumerate() {
        let label = match classify_normal(y, ic_size, &structure) {
            Ok(l) => l,
            // A zero normal has no structure; record it and move on.
            Err(circlaw_core::Error::ZeroVector) => {
                let _ = writeln!(st_csv, "{t},zero,,,,,,,");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        *labels.entry(label.name()).or_default() += 1;
        let row = match &label {
            StructureLabel::VerySteep { index, ratio } => format!("{index},{ratio:?},,,,,"),
            StructureLabel::SlopingManyLevels {
                decay_margin,
                level_upper,
                level_bound,
            } => format!(",,{decay_margin:?},,{level_upper},{level_bound:?},false"),
            StructureLabel::Neither {
                decay_margin,
                level_lower,
                level_upper,
                level_bound,
                undecided,
            } => format!(",,{decay_margin:?},{level_lower},{level_upper},{level_bound:?},{undecided}"),
        };
        let _ = writeln!(st_csv, "{t},{},{row}", label.name());
    }

    let mut part_csv = String::from("index,re,im,layer,jx,jy\n");
    for (i, w) in ys[0].iter().enumerate() {
        match plane_partition_cell(*w, rho)? {
            PlaneCell::Covered { layer, j } => {
                let _ = writeln!(part_csv, "{i},{:?},{:?},{layer},{},{}", w.re, w.im, j.0, j.1);
            }
            PlaneCell::Uncovered => {
                let _ = writeln!(part_csv, "{i},{:?},{:?},,,", w.re, w.im);
            }
        }
    }

    ctx.write_json("normals.json", &records)?;
    ctx.write("clusters.csv", cl_csv)?;
    ctx.write("structure.csv", st_csv)?;
    ctx.write("partition.csv", part_csv)?;
    ctx.summarize("setup_seed", ctx.setup_seed());
    ctx.summarize("clusters", clusters.clusters.len());
    ctx.summarize("largest_cluster", clusters.clusters.first().map_or(0, Vec::len));
    ctx.summarize("labels", labels);
    Ok(())
}
