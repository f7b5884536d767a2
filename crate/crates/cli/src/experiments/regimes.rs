use std::fmt::Write as _;

use circlaw_core::hermitization::{
    bound_curves, build_shifted, sv_bound_check, tail_log_sum, BoundCheck, ShiftSpec, SvBoundParams, SvBoundReport,
    TailParams, TailReport, DEFAULT_LOG_FLOOR,
};
use circlaw_core::linalg::singular_values;
use circlaw_core::Complex64;
use serde_json::json;

use super::{mean, positive, Context, Ensemble};
use crate::error::CliResult;
use crate::svg::{render_sv_profile, sv_profile_csv, BoundCurve};

struct Shift {
    svals: Vec<f64>,
    tail: TailReport,
    bounds: SvBoundReport,
}

fn check_cells(c: &BoundCheck) -> String {
    let k = c.tightest_k.map(|k| k.to_string()).unwrap_or_default();
    format!("{},{},{:?},{k},{}", c.applicable, c.pass, c.margin, c.checked)
}

/// Singular values of `B_z`, the log-tail split into the four index
/// regimes, and the three singular-value lower bounds.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let s = &ctx.settings;
    let ens = Ensemble::from_settings(s)?;
    let zs = s.complex_list("z")?.unwrap_or_else(|| vec![Complex64::new(0.5, 0.0)]);
    let tail = TailParams {
        t: positive(s, "t", 1.0)?,
        d: ens.d,
        c_const: positive(s, "c_const", 1.0)?,
        floor: positive(s, "floor", DEFAULT_LOG_FLOOR)?,
    };
    let defaults = SvBoundParams::default();
    let bound = SvBoundParams {
        cook_c_range: positive(s, "cook_c_range", defaults.cook_c_range)?,
        cook_c_bound: positive(s, "cook_c_bound", defaults.cook_c_bound)?,
        inter_c: positive(s, "inter_c", defaults.inter_c)?,
    };
    let sqrt_d = (ens.d as f64).sqrt();

    let trials = ctx.par_map(ctx.trials, |t| {
        let (a, _) = ens.sample(ctx.trial_seed(t))?;
        zs.iter()
            .map(|&z| {
                let svals = singular_values(&build_shifted(&a, &ShiftSpec::normalized(z, ens.d)?))?;
                let unscaled: Vec<f64> = svals.iter().map(|v| v * sqrt_d).collect();
                Ok(Shift {
                    tail: tail_log_sum(&svals, &tail)?,
                    bounds: sv_bound_check(&unscaled, ens.d, z * sqrt_d, &bound)?,
                    svals,
                })
            })
            .collect::<CliResult<Vec<_>>>()
    })?;

    let mut table = String::from(
        "trial,z_index,re_z,im_z,tail_sum,I1,I2,I3,I4,large_sum,floored,b1,b2,b3,\
         smin_applicable,smin_pass,smin_margin,smin_k,smin_checked,\
         cook_applicable,cook_pass,cook_margin,cook_k,cook_checked,\
         inter_applicable,inter_pass,inter_margin,inter_k,inter_checked\n",
    );
    let mut profiles = String::from("trial,z_index,k,s,regime\n");
    for (t, shifts) in trials.iter().enumerate() {
        for (j, (z, sh)) in zs.iter().zip(shifts).enumerate() {
            let r = &sh.tail;
            let [b1, b2, b3] = r.boundaries;
            let _ = writeln!(
                table,
                "{t},{j},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{b1},{b2},{b3},{},{},{}",
                z.re,
                z.im,
                r.tail_sum,
                r.regime_sums[0],
                r.regime_sums[1],
                r.regime_sums[2],
                r.regime_sums[3],
                r.large_sum,
                r.floored,
                check_cells(&sh.bounds.smin),
                check_cells(&sh.bounds.cook_anti),
                check_cells(&sh.bounds.inter_sv)
            );
            for (i, v) in sh.svals.iter().enumerate() {
                let k = i + 1;
                let regime = match (0..4).find(|&g| r.regime_indices[g].binary_search(&k).is_ok()) {
                    Some(g) => format!("I{}", g + 1),
                    None if r.large_indices.binary_search(&k).is_ok() => "large".into(),
                    None => String::new(),
                };
                let _ = writeln!(profiles, "{t},{j},{k},{v:?},{regime}");
            }
        }
    }
    let curves: Vec<BoundCurve> = bound_curves(ens.n, ens.d, &bound)
        .into_iter()
        .map(|(name, points)| BoundCurve {
            name: name.to_string(),
            points,
        })
        .collect();
    let first = &trials[0][0].svals;
    ctx.write("sv_regimes.csv", table)?;
    ctx.write("sv_profiles.csv", profiles)?;
    ctx.write("sv_profile.csv", sv_profile_csv(first, &curves))?;
    ctx.write("sv_profile.svg", render_sv_profile(first, &curves))?;

    let per_z: Vec<_> = zs
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let rate =
                |f: fn(&SvBoundReport) -> &BoundCheck| mean(trials.iter().map(|sh| f(&sh[j].bounds).pass as u8 as f64));
            json!({
                "z": z,
                "mean_tail_sum": mean(trials.iter().map(|sh| sh[j].tail.tail_sum)),
                "smin_pass_rate": rate(|b| &b.smin),
                "cook_anti_pass_rate": rate(|b| &b.cook_anti),
                "inter_sv_pass_rate": rate(|b| &b.inter_sv),
            })
        })
        .collect();
    ctx.summarize("boundaries", trials[0][0].tail.boundaries);
    ctx.summarize("shifts", per_z);
    Ok(())
}
