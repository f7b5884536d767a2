use std::fmt::Write as _;

use circlaw_core::digraph::SampleMethod;

use super::{method_name, Context, Ensemble};
use crate::error::CliResult;

/// Draws `trials` matrices and writes each in the text format.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let ens = Ensemble::from_settings(&ctx.settings)?;
    let draws = ctx.par_map(ctx.trials, |t| ens.sample(ctx.trial_seed(t)))?;
    let mut table = String::from("trial,seed,method,attempts,accepted,proposals,loops\n");
    for (t, (m, how)) in draws.iter().enumerate() {
        ctx.write(&format!("matrix_{t:04}.txt"), m.to_text())?;
        let (attempts, accepted, proposals) = match *how {
            SampleMethod::Exact { attempts } => (attempts, 0, 0),
            SampleMethod::SwitchChain { accepted, proposals } => (0, accepted, proposals),
        };
        let loops = (0..m.n()).filter(|&i| m.get(i, i)).count();
        let _ = writeln!(
            table,
            "{t},{},{},{attempts},{accepted},{proposals},{loops}",
            ctx.trial_seed(t),
            method_name(how)
        );
    }
    ctx.write("samples.csv", table)?;
    let exact = draws.iter().filter(|(_, how)| how.is_exact()).count();
    ctx.summarize("exact_draws", exact);
    ctx.summarize("chain_draws", draws.len() - exact);
    Ok(())
}
