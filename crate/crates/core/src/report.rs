//! Run output files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::engine::{GenerationRecord, RunResult};
use crate::error::{DseError, Result};

/// `generation,phase,best_score,mean_score,evals`; empty cells for scores
/// with no feasible design.
pub fn write_convergence<W: Write>(out: &mut W, history: &[GenerationRecord]) -> std::io::Result<()> {
    let cell = |v: f64| if v.is_finite() { v.to_string() } else { String::new() };
    writeln!(out, "generation,phase,best_score,mean_score,evals")?;
    for g in history {
        writeln!(
            out,
            "{},{},{},{},{}",
            g.generation,
            g.phase,
            cell(g.best_score),
            cell(g.mean_score),
            g.evals
        )?;
    }
    Ok(())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| DseError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| DseError::io(path, e))
}

/// Write `<prefix>run.json`, `<prefix>convergence.csv` and
/// `<prefix>timing.json` under `dir`.
pub fn write_run(dir: &Path, prefix: &str, run: &RunResult) -> Result<Vec<PathBuf>> {
    let run_path = dir.join(format!("{prefix}run.json"));
    write_file(&run_path, run.to_json().as_bytes())?;

    let conv_path = dir.join(format!("{prefix}convergence.csv"));
    let mut buf = Vec::new();
    write_convergence(&mut buf, &run.outcome.history).expect("writing to a Vec");
    write_file(&conv_path, &buf)?;

    let timing_path = dir.join(format!("{prefix}timing.json"));
    let t = run.outcome.timing;
    let timing = serde_json::json!({
        "sampling_s": t.sampling_s,
        "search_s": t.search_s,
        "total_s": t.total_s(),
        "sampling_evals": run.outcome.sampling_evals,
        "eval_count": run.outcome.eval_count,
    });
    write_file(&timing_path, serde_json::to_string_pretty(&timing).expect("json").as_bytes())?;
    Ok(vec![run_path, conv_path, timing_path])
}
