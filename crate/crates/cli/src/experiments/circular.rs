use std::fmt::Write as _;

use circlaw_core::digraph::SampleMethod;
use circlaw_core::hermitization::{
    angular_ks, build_shifted, esd, log_potential_at, log_potential_circular, radial_cdf_distance, LogPotential,
    ReferenceLaw, ShiftSpec, DEFAULT_LOG_FLOOR,
};
use circlaw_core::linalg::{eigenvalues_with, EigenOptions};
use circlaw_core::Complex64;

use super::{mean, method_name, positive, Context, Ensemble};
use crate::error::CliResult;
use crate::svg::{radial_cdf_csv, render_radial_cdf, render_scatter, Overlay};

/// Radius used for the "inside the disk" fraction.
const DISK_SLACK: f64 = 1.1;

struct Trial {
    method: SampleMethod,
    eigs: Vec<Complex64>,
    radial: f64,
    km: Option<f64>,
    inside: f64,
    ks: (f64, f64),
    potentials: Vec<LogPotential>,
}

/// ESD of `d^{-1/2} A` against the circular law, and log potentials on a
/// grid of shifts.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let s = &ctx.settings;
    let ens = Ensemble::from_settings(s)?;
    let zs = s
        .complex_list("z")?
        .unwrap_or_else(|| [0.3, 0.8, 1.5].map(|x| Complex64::new(x, 0.0)).to_vec());
    let floor = positive(s, "floor", DEFAULT_LOG_FLOOR)?;
    let eig = EigenOptions {
        sweeps_per_row: s.get_or("eig_sweeps", EigenOptions::default().sweeps_per_row)?,
        ..EigenOptions::default()
    };
    let sqrt_d = (ens.d as f64).sqrt();

    let trials = ctx.par_map(ctx.trials, |t| {
        let (a, method) = ens.sample(ctx.trial_seed(t))?;
        let b = build_shifted(&a, &ShiftSpec::normalized(Complex64::new(0.0, 0.0), ens.d)?);
        let eigs = eigenvalues_with(&b, &eig)?;
        let mu = esd(&eigs);
        let km = (ens.d >= 2).then(|| {
            let raw = esd(&eigs.iter().map(|l| l * sqrt_d).collect::<Vec<_>>());
            radial_cdf_distance(&raw, &ReferenceLaw::KestenMcKay { d: ens.d })
        });
        let ks = angular_ks(&mu);
        let potentials = zs
            .iter()
            .map(|&z| log_potential_at(&a, z, floor))
            .collect::<Result<_, _>>()?;
        Ok(Trial {
            method,
            radial: radial_cdf_distance(&mu, &ReferenceLaw::Circular),
            km,
            inside: eigs.iter().filter(|l| l.norm() <= DISK_SLACK).count() as f64 / eigs.len() as f64,
            ks: (ks.statistic, ks.p_value),
            eigs,
            potentials,
        })
    })?;

    let mut table =
        String::from("trial,seed,method,radial_distance,km_distance,frac_within_1_1,angular_ks,angular_p\n");
    let mut points = String::from("trial,index,re,im\n");
    let mut pot_trials = String::from("trial,re_z,im_z,U_empirical,floored_count\n");
    for (t, tr) in trials.iter().enumerate() {
        let km = tr.km.map(|v| format!("{v:?}")).unwrap_or_default();
        let _ = writeln!(
            table,
            "{t},{},{},{:?},{km},{:?},{:?},{:?}",
            ctx.trial_seed(t),
            method_name(&tr.method),
            tr.radial,
            tr.inside,
            tr.ks.0,
            tr.ks.1
        );
        for (k, l) in tr.eigs.iter().enumerate() {
            let _ = writeln!(points, "{t},{k},{:?},{:?}", l.re, l.im);
        }
        for (z, p) in zs.iter().zip(&tr.potentials) {
            let _ = writeln!(pot_trials, "{t},{:?},{:?},{:?},{}", z.re, z.im, p.value, p.floored);
        }
    }
    let mut potential = String::from("re_z,im_z,U_empirical,U_circular,floored_count\n");
    let mut gaps = Vec::new();
    for (j, z) in zs.iter().enumerate() {
        let u = mean(trials.iter().map(|tr| tr.potentials[j].value));
        let floored: usize = trials.iter().map(|tr| tr.potentials[j].floored).sum();
        let uc = log_potential_circular(*z);
        gaps.push((u - uc).abs());
        let _ = writeln!(potential, "{:?},{:?},{u:?},{uc:?},{floored}", z.re, z.im);
    }
    let pooled = esd(&trials.iter().flat_map(|tr| tr.eigs.iter().copied()).collect::<Vec<_>>());

    ctx.write("circular_law.csv", table)?;
    ctx.write("eigenvalues.csv", points)?;
    ctx.write("eigenvalues.svg", render_scatter(&pooled, &Overlay::unit_circle()))?;
    ctx.write("radial_cdf.csv", radial_cdf_csv(&pooled, &ReferenceLaw::Circular))?;
    ctx.write("radial_cdf.svg", render_radial_cdf(&pooled, &ReferenceLaw::Circular))?;
    ctx.write("potential.csv", potential)?;
    ctx.write("potential_trials.csv", pot_trials)?;

    let inside = pooled.atoms().iter().filter(|l| l.norm() <= DISK_SLACK).count() as f64 / pooled.len() as f64;
    ctx.summarize("mean_radial_distance", mean(trials.iter().map(|t| t.radial)));
    ctx.summarize(
        "mean_km_distance",
        trials
            .iter()
            .map(|t| t.km)
            .sum::<Option<f64>>()
            .map(|v| v / trials.len() as f64),
    );
    ctx.summarize("frac_within_1_1", inside);
    ctx.summarize("potential_gaps", gaps);
    ctx.summarize("exact_draws", trials.iter().filter(|t| t.method.is_exact()).count());
    Ok(())
}
