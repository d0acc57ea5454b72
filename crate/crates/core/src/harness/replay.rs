//! Runs a detector over a trace file and reports damage plus throughput.

use std::path::Path;
use std::time::Instant;

use crate::error::{config, Result};
use crate::sim::{replay, trace::open_trace, DamageReport};

use super::config::ExperimentConfig;
use super::output::{preamble, write_csv, D_FP_NOTE};
use super::simulate::{row, run_seeds, RunRow};
use super::{build_detector, require_dir};

#[derive(Clone, Debug)]
pub struct ReplayOutcome {
    pub row: RunRow,
    pub report: DamageReport,
    pub packets_per_second: f64,
}

/// Replays `trace` with the detector and seeds of sweep run `run_id`, so a
/// trace written by `simulate` reproduces that run's row. Writes `replay.csv`.
pub fn cmd_replay(cfg: &ExperimentConfig, trace: &Path, out: &Path, run_id: u64) -> Result<ReplayOutcome> {
    cfg.validate()?;
    let cells = cfg.cells();
    let repeats = cfg.run.repeats as u64;
    let Some(cell) = cells.get((run_id / repeats) as usize) else {
        return config(format!("run id {run_id} outside the sweep's {} runs", cells.len() as u64 * repeats));
    };
    let repeat = (run_id % repeats) as u32;
    let (_, det_seed, _) = run_seeds(cfg, cell, repeat);
    let mut det = build_detector(cfg, cell.detector, det_seed)?;
    let spec = cfg.link.spec()?;
    let reader = open_trace(trace, cfg.link.max_packet)?;
    require_dir(out)?;
    let start = Instant::now();
    let (report, _) = replay(&mut det, reader, &spec, cfg.background()?.rate, cfg.horizon())?;
    let secs = start.elapsed().as_secs_f64().max(1e-9);
    let pps = report.packets as f64 / secs;
    let r = row(cfg, cell, repeat, &report);
    let extra = [
        D_FP_NOTE.to_string(),
        format!("trace: {}", trace.display()),
        format!("run_id: {run_id}"),
        format!("packets: {}", report.packets),
        format!("packets_per_second: {pps:.0}"),
    ];
    write_csv(&out.join("replay.csv"), &preamble("replay", cfg, &extra), std::slice::from_ref(&r))?;
    Ok(ReplayOutcome { row: r, report, packets_per_second: pps })
}
