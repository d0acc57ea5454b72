//! Monte-Carlo single-level estimates next to the analytic lower bound.

use std::path::Path;

use serde::Serialize;

use crate::analysis::{alpha_half, alpha_one, monte_carlo_single_level, single_level_bound, LegitProfile};
use crate::error::{config, Result};
use crate::hash::derive_seed;

use super::config::ExperimentConfig;
use super::output::{preamble, write_csv};
use super::{pool, require_dir};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub m: u64,
    pub n: u64,
    pub alpha: f64,
    pub profile: String,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub bound_satisfied: bool,
}

/// The default α grid of a cell: {α_0.5/2, α_0.5, α_1.0, 2α_1.0}.
pub fn default_alphas(m: u64, n: u64) -> [f64; 4] {
    let h = alpha_half(m, n);
    let o = alpha_one(m, n);
    [h / 2.0, h, o, 2.0 * o]
}

pub fn oracle_rows(cfg: &ExperimentConfig) -> Result<Vec<OracleRow>> {
    let o = &cfg.oracle;
    if o.trials < 100 {
        return config(format!("oracle.trials = {} must be at least 100", o.trials));
    }
    if o.m.is_empty() || o.n.is_empty() || o.profiles.is_empty() {
        return config("oracle.m, oracle.n and oracle.profiles need values");
    }
    let mut cells = Vec::new();
    for &m in &o.m {
        for &n in &o.n {
            if n <= m || m < 2 {
                return config(format!("oracle needs n > m >= 2, got m = {m}, n = {n}"));
            }
            let alphas = if o.alphas.is_empty() { default_alphas(m, n).to_vec() } else { o.alphas.clone() };
            for a in alphas {
                for &k in &o.profiles {
                    if k == 0 {
                        return config("oracle.profiles entries must be at least 1");
                    }
                    cells.push((m, n, a, LegitProfile { k }));
                }
            }
        }
    }
    let seed = cfg.run.seed;
    let rows = pool(cfg.run.workers)?.install(|| {
        cells
            .iter()
            .enumerate()
            .map(|(i, &(m, n, a, p))| {
                let e = monte_carlo_single_level(m as usize, n, a, p, o.trials, derive_seed(seed, &[i as u64]));
                let bound = single_level_bound(m, n, a);
                OracleRow {
                    m,
                    n,
                    alpha: a,
                    profile: p.label(),
                    estimate: e.mean,
                    stderr: e.stderr,
                    bound,
                    bound_satisfied: e.mean >= bound - 3.0 * e.stderr - 0.02,
                }
            })
            .collect()
    });
    Ok(rows)
}

pub fn cmd_oracle(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<OracleRow>> {
    let rows = oracle_rows(cfg)?;
    require_dir(out)?;
    write_csv(&out.join("oracle.csv"), &preamble("oracle", cfg, &[]), &rows)?;
    Ok(rows)
}
