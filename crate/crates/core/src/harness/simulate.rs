//! Attack-grid sweeps: one simulation per (cell, repeat), aggregated per cell.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::hash::{derive_seed, rng_from_seed};
use crate::sim::{simulate, trace::write_trace, DamageReport, SimConfig};

use super::config::{Cell, ExperimentConfig};
use super::output::{preamble, write_csv, D_FP_NOTE};
use super::{build_detector, pool, require_dir};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub run_id: u64,
    pub detector: &'static str,
    pub m: usize,
    #[serde(rename = "R_atk_bytes_s")]
    pub r_atk: f64,
    pub theta: f64,
    #[serde(rename = "T_b_ns")]
    pub t_b_ns: u64,
    pub d_over: f64,
    pub d_fp: f64,
    pub fn_ratio: f64,
    pub fp_count: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub detector: &'static str,
    pub m: usize,
    #[serde(rename = "R_atk_bytes_s")]
    pub r_atk: f64,
    pub theta: f64,
    #[serde(rename = "T_b_ns")]
    pub t_b_ns: u64,
    pub repeats: u32,
    pub d_over: f64,
    pub d_fp: f64,
    pub damage: f64,
    pub fn_ratio: f64,
    pub fp_count: f64,
}

/// Seeds of one run: (run seed, detector seed, traffic seed).
pub fn run_seeds(cfg: &ExperimentConfig, cell: &Cell, repeat: u32) -> (u64, u64, u64) {
    let run = derive_seed(cfg.run.seed, &[cell.traffic, repeat as u64]);
    (run, derive_seed(run, &[1, cell.detector as u64]), derive_seed(run, &[0]))
}

pub fn run_id(cfg: &ExperimentConfig, cell: &Cell, repeat: u32) -> u64 {
    cell.index * cfg.run.repeats as u64 + repeat as u64
}

pub fn sim_config(cfg: &ExperimentConfig, cell: &Cell, record: bool) -> Result<SimConfig> {
    let pattern = cfg.attack_pattern(cell)?;
    Ok(SimConfig {
        spec: cfg.link.spec()?,
        rho: cfg.link.rho()?,
        background: cfg.background()?,
        attacks: vec![pattern; cfg.traffic.attack_flows as usize],
        horizon: cfg.horizon(),
        attack_phase: cfg.traffic.attack_phase,
        record,
    })
}

pub fn row(cfg: &ExperimentConfig, cell: &Cell, repeat: u32, r: &DamageReport) -> RunRow {
    RunRow {
        run_id: run_id(cfg, cell, repeat),
        detector: cell.detector.label(),
        m: cfg.detector.m,
        r_atk: cell.rate,
        theta: cell.theta,
        t_b_ns: cell.t_b,
        d_over: r.d_over,
        d_fp: r.d_fp,
        fn_ratio: r.fn_ratio,
        fp_count: r.fp_count,
        seed: run_seeds(cfg, cell, repeat).0,
    }
}

/// One simulation. With `trace_dir` the generated stream is written there.
pub fn run_cell(cfg: &ExperimentConfig, cell: &Cell, repeat: u32, trace_dir: Option<&Path>) -> Result<(RunRow, DamageReport)> {
    let (_, det_seed, traffic_seed) = run_seeds(cfg, cell, repeat);
    let mut det = build_detector(cfg, cell.detector, det_seed)?;
    let sc = sim_config(cfg, cell, trace_dir.is_some())?;
    let out = simulate(&mut det, &sc, &mut rng_from_seed(traffic_seed))?;
    if let (Some(dir), Some(trace)) = (trace_dir, out.trace.as_ref()) {
        let path = dir.join(format!("run_{}.csv", run_id(cfg, cell, repeat)));
        write_trace(std::fs::File::create(path)?, trace)?;
    }
    Ok((row(cfg, cell, repeat, &out.report), out.report))
}

fn summarize(cfg: &ExperimentConfig, cell: &Cell, rows: &[RunRow]) -> SummaryRow {
    let k = rows.len() as f64;
    let mean = |f: &dyn Fn(&RunRow) -> f64| rows.iter().map(f).sum::<f64>() / k;
    let d_over = mean(&|r| r.d_over);
    let d_fp = mean(&|r| r.d_fp);
    SummaryRow {
        detector: cell.detector.label(),
        m: cfg.detector.m,
        r_atk: cell.rate,
        theta: cell.theta,
        t_b_ns: cell.t_b,
        repeats: rows.len() as u32,
        d_over,
        d_fp,
        damage: d_over + d_fp,
        fn_ratio: mean(&|r| r.fn_ratio),
        fp_count: mean(&|r| r.fp_count as f64),
    }
}

/// Runs the full sweep and returns per-run rows and per-cell means.
pub fn sweep(cfg: &ExperimentConfig, trace_dir: Option<&Path>) -> Result<(Vec<RunRow>, Vec<SummaryRow>)> {
    cfg.validate()?;
    let cells = cfg.cells();
    let jobs: Vec<(Cell, u32)> = cells.iter().flat_map(|c| (0..cfg.run.repeats).map(move |r| (*c, r))).collect();
    let rows: Vec<RunRow> = pool(cfg.run.workers)?.install(|| {
        jobs.par_iter().map(|(c, r)| run_cell(cfg, c, *r, trace_dir).map(|x| x.0)).collect::<Result<Vec<_>>>()
    })?;
    let per = cfg.run.repeats as usize;
    let summary = cells.iter().zip(rows.chunks(per)).map(|(c, rs)| summarize(cfg, c, rs)).collect();
    Ok((rows, summary))
}

/// Writes `runs.csv` and `summary.csv` into `out`.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path, write_traces: bool) -> Result<(Vec<RunRow>, Vec<SummaryRow>)> {
    cfg.validate()?;
    require_dir(out)?;
    let trace_dir = out.join("traces");
    if write_traces {
        require_dir(&trace_dir)?;
    }
    let (rows, summary) = sweep(cfg, write_traces.then_some(trace_dir.as_path()))?;
    let pre = preamble("simulate", cfg, &[D_FP_NOTE.to_string()]);
    write_csv(&out.join("runs.csv"), &pre, &rows)?;
    write_csv(&out.join("summary.csv"), &pre, &summary)?;
    Ok((rows, summary))
}
