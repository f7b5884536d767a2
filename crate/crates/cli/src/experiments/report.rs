use std::fmt::Write as _;

use serde_json::{json, Value};

use super::Context;
use crate::artifacts::sha256_hex;
use crate::error::{config_err, CliResult};

/// Re-reads earlier run directories and verifies every artifact listed in
/// their `run.json` against its recorded hash.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let inputs: Vec<String> = ctx
        .settings
        .list("inputs")?
        .ok_or_else(|| config_err("missing `inputs`"))?;
    if inputs.is_empty() {
        return Err(config_err("`inputs` lists no run directories"));
    }
    let mut table = String::from("run,kind,config_hash,artifact,sha256,verified\n");
    let mut runs = Vec::new();
    let mut all_ok = true;
    for dir in &inputs {
        let path = ctx.settings.base_dir.join(dir).join("run.json");
        let text =
            std::fs::read_to_string(&path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let rec: Value = serde_json::from_str(&text)
            .map_err(|e| config_err(format!("{} is not a run record: {e}", path.display())))?;
        ctx.add_input(&format!("{dir}/run.json"), text.as_bytes());
        let kind = rec["kind"].as_str().unwrap_or_default().to_string();
        let hash = rec["config_hash"].as_str().unwrap_or_default().to_string();
        let mut verified = 0;
        let outputs = rec["outputs"].as_array().cloned().unwrap_or_default();
        for out in &outputs {
            let name = out["path"].as_str().unwrap_or_default();
            let want = out["sha256"].as_str().unwrap_or_default();
            let got = std::fs::read(ctx.settings.base_dir.join(dir).join(name))
                .map(|b| sha256_hex(&b))
                .ok();
            let ok = got.as_deref() == Some(want);
            verified += ok as usize;
            all_ok &= ok;
            let _ = writeln!(table, "{dir},{kind},{hash},{name},{want},{ok}");
        }
        runs.push(json!({
            "run": dir,
            "kind": kind,
            "config_hash": hash,
            "artifacts": outputs.len(),
            "verified": verified,
            "summary": rec["summary"],
        }));
    }
    ctx.write("report.csv", table)?;
    ctx.write_json("report.json", &json!({"runs": runs, "all_verified": all_ok}))?;
    ctx.summarize("runs", inputs.len());
    ctx.summarize("all_verified", all_ok);
    Ok(())
}
