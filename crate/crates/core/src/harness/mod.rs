//! Experiment runner behind the command-line tool: builds detectors from a
//! config, runs sweeps in parallel and writes CSV with a metadata preamble.

pub mod bounds;
pub mod config;
pub mod oracle;
pub mod output;
pub mod replay;
pub mod simulate;

pub use bounds::cmd_bounds;
pub use config::{Cell, DetectorKind, ExperimentConfig};
pub use oracle::cmd_oracle;
pub use replay::cmd_replay;
pub use simulate::{cmd_simulate, run_cell, RunRow, SummaryRow};

use crate::baseline::{Amf, AmfConfig, AmfFm, AmfFmConfig, FlowMemory, FmConfig};
use crate::detector::Detector;
use crate::eardet::{Eardet, EardetConfig};
use crate::error::{config, Result};
use crate::hash::derive_seed;
use crate::hybrid::{preset_for, twin_cycle2, Clef, ClefBuild, ClefConfig, Cycle2, TwinRlfd, TwinRlfdConfig};
use crate::model::Nanos;
use crate::rlfd::{default_depth, Rlfd, RlfdConfig};

/// Builds one detector of `kind` from the config's detector section.
pub fn build_detector(cfg: &ExperimentConfig, kind: DetectorKind, seed: u64) -> Result<Box<dyn Detector>> {
    let spec = cfg.link.spec()?;
    let rho = cfg.link.rho()?;
    let d = &cfg.detector;
    let m = d.m;
    let n = cfg.expected_flows();
    let t_ell = spec.burst_drain_time();
    let eardet_cfg = |m: usize| -> Result<EardetConfig> {
        let c = EardetConfig::with_max_packet(m, spec, rho, cfg.link.max_packet)?;
        match d.beta_th {
            Some(b) => c.with_beta_th(b),
            None => Ok(c),
        }
    };
    Ok(match kind {
        DetectorKind::Clef => {
            let mut b = ClefBuild::new(m, spec, rho, n, seed);
            b.jitter = d.jitter;
            b.depth = d.depth;
            b.max_packet = cfg.link.max_packet;
            b.cycle2 = if d.preset { Cycle2::Preset } else { Cycle2::Formula { alpha_target: d.alpha_target } };
            let mut c = ClefConfig::build(b)?;
            if let Some(bt) = d.beta_th {
                c.eardet = c.eardet.with_beta_th(bt)?;
            }
            c.twin.rlfd1.hashed_ids = d.hashed_ids;
            c.twin.rlfd2.hashed_ids = d.hashed_ids;
            Box::new(Clef::new(c)?)
        }
        DetectorKind::Eardet => Box::new(Eardet::new(eardet_cfg(m)?)),
        DetectorKind::Rlfd => {
            let depth = match (d.depth, d.preset) {
                (Some(x), _) => x,
                (None, true) => preset_for(m)?.single_d,
                (None, false) => default_depth(m, n),
            };
            let mut c = RlfdConfig::new(m, depth, t_ell, spec, seed)?;
            c.hashed_ids = d.hashed_ids;
            Box::new(Rlfd::new(c)?)
        }
        DetectorKind::TwinRlfd => {
            let per = m / 2;
            let depth = d.depth.unwrap_or_else(|| default_depth(per, n));
            let t_c1 = t_ell * depth as Nanos;
            let gamma_h = rho.as_f64() / (m as f64 + 1.0);
            let t_c2 = twin_cycle2(depth, gamma_h, d.alpha_target, spec.gamma.as_f64(), t_c1)?;
            let mut base = RlfdConfig::new(per, depth, t_ell, spec, derive_seed(seed, &[1]))?.with_jitter(d.jitter)?;
            base.hashed_ids = d.hashed_ids;
            let c = TwinRlfdConfig::from_cycles(base, t_c1, t_c2, derive_seed(seed, &[2]))?;
            Box::new(TwinRlfd::new(c)?)
        }
        DetectorKind::Amf => {
            let c = AmfConfig { m, stages: d.amf_stages, spec, conservative: d.conservative, seed };
            Box::new(Amf::new(c)?)
        }
        DetectorKind::Fm => Box::new(FlowMemory::new(FmConfig::new(m, spec, seed)?)),
        DetectorKind::AmfFm => {
            let mut c = AmfFmConfig::split(m, spec, seed)?;
            c.amf.conservative = d.conservative;
            Box::new(AmfFm::new(c)?)
        }
    })
}

/// Worker pool for a sweep; 0 workers means one per core.
pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::Error::Invariant(format!("thread pool: {e}")))
}

pub(crate) fn require_dir(dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    if !dir.is_dir() {
        return config(format!("{} is not a directory", dir.display()));
    }
    Ok(())
}
