use circlaw_core::digraph::RegularDigraph;
use circlaw_core::hermitization::{build_shifted, esd, ShiftSpec};
use circlaw_core::linalg::{EigenOptions, SpectralSummary};
use circlaw_core::Complex64;
use serde_json::json;

use super::{Context, Ensemble};
use crate::config::parse_complex;
use crate::error::{config_err, CliResult};
use crate::svg::{render_scatter, Overlay};

/// Eigenvalues, singular values and backward errors of `scale * A - z Id`,
/// for a matrix read from disk or for sampled ones.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let s = &ctx.settings;
    let z = match s.raw("z") {
        Some(v) => parse_complex(v).ok_or_else(|| config_err(format!("bad complex `{v}` for `z`")))?,
        None => Complex64::new(0.0, 0.0),
    };
    let eig = EigenOptions {
        sweeps_per_row: s.get_or("eig_sweeps", EigenOptions::default().sweeps_per_row)?,
        ..EigenOptions::default()
    };
    let scale_raw = s.raw("scale").unwrap_or("1").to_string();

    let matrices: Vec<RegularDigraph> = if let Some(path) = s.raw("matrix") {
        if s.raw("n").is_some() || s.raw("d").is_some() {
            return Err(config_err("`matrix` and `n`/`d` are mutually exclusive"));
        }
        if ctx.trials != 1 {
            return Err(config_err("a `matrix` input is a single trial"));
        }
        let full = s.base_dir.join(path);
        let text =
            std::fs::read_to_string(&full).map_err(|e| config_err(format!("cannot read {}: {e}", full.display())))?;
        let m = RegularDigraph::from_text(&text).map_err(|e| config_err(format!("{}: {e}", full.display())))?;
        let path = path.to_string();
        ctx.add_input(&path, text.as_bytes());
        vec![m]
    } else {
        let ens = Ensemble::from_settings(s)?;
        let draws = ctx.par_map(ctx.trials, |t| ens.sample(ctx.trial_seed(t)))?;
        let mut out = Vec::with_capacity(draws.len());
        for (t, (m, _)) in draws.into_iter().enumerate() {
            ctx.write(&format!("matrix_{t:04}.txt"), m.to_text())?;
            out.push(m);
        }
        out
    };
    let d = matrices[0].d();
    let scale = match scale_raw.as_str() {
        "normalized" => 1.0 / (d as f64).sqrt(),
        v => v
            .parse::<f64>()
            .ok()
            .filter(|x| *x > 0.0 && x.is_finite())
            .ok_or_else(|| config_err(format!("`scale` must be positive or `normalized`, got `{v}`")))?,
    };
    let spec = ShiftSpec::new(z, scale)?;

    let summaries = ctx.par_map(matrices.len(), |t| {
        Ok(SpectralSummary::compute_with(
            &build_shifted(&matrices[t], &spec),
            &eig,
        )?)
    })?;
    let overlay = Overlay {
        center: -z,
        radius: scale * (d as f64).sqrt(),
        label: format!("radius {:.3}", scale * (d as f64).sqrt()),
    };
    let mut per_trial = Vec::new();
    for (t, sm) in summaries.iter().enumerate() {
        ctx.write(&format!("spectrum_{t:04}.csv"), sm.to_csv())?;
        ctx.write(
            &format!("spectrum_{t:04}.svg"),
            render_scatter(&esd(&sm.eigenvalues), &overlay),
        )?;
        let spectral_radius = sm.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let worst = sm.backward_errors.iter().copied().fold(0.0, f64::max);
        per_trial.push(json!({
            "trial": t,
            "spectral_radius": spectral_radius,
            "s_min": sm.smallest_singular_value(),
            "max_backward_error": worst,
            "numerically_zero": sm.numerically_zero().iter().filter(|&&b| b).count(),
        }));
    }
    ctx.summarize("scale", scale);
    ctx.summarize("z", z);
    ctx.summarize("trials", per_trial);
    Ok(())
}
