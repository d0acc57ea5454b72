//! Tabulates the closed-form bounds over the configured grid.

use std::path::Path;

use serde::Serialize;

use crate::analysis::{
    alpha_half, alpha_one, r_min_curves, single_level_bound, total_detection_bound, twin_damage_bound, TwinInputs,
};
use crate::error::{config, Result};

use super::config::ExperimentConfig;
use super::output::{preamble, write_csv};
use super::require_dir;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub quantity: &'static str,
    pub m: u64,
    pub n: u64,
    pub n_gamma: u64,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
    pub t_b_s: Option<f64>,
    pub value: Option<f64>,
    pub status: String,
}

impl BoundRow {
    fn new(quantity: &'static str, m: u64, n: u64, n_gamma: u64) -> Self {
        BoundRow { quantity, m, n, n_gamma, alpha: None, theta: None, t_b_s: None, value: None, status: "ok".into() }
    }
}

pub fn bound_rows(cfg: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    let b = &cfg.bounds;
    if b.m.is_empty() {
        return config("bounds.m is empty");
    }
    let n_gamma = cfg.link.n_gamma();
    let n = b.n.unwrap_or(n_gamma);
    let gamma = cfg.link.gamma;
    let mut rows = Vec::new();
    for &m in &b.m {
        if m < 2 {
            return config(format!("bounds.m = {m} must be at least 2"));
        }
        let mut r = BoundRow::new("alpha_half", m, n_gamma, n_gamma);
        r.value = Some(alpha_half(m, n_gamma));
        rows.push(r);
        let mut r = BoundRow::new("alpha_one", m, n_gamma, n_gamma);
        r.value = Some(alpha_one(m, n_gamma));
        rows.push(r);
        for &a in &b.alphas {
            let mut r = BoundRow::new("single_level_bound", m, n_gamma, n_gamma);
            r.alpha = Some(a);
            r.value = Some(single_level_bound(m, n_gamma, a));
            rows.push(r);
            let mut r = BoundRow::new("total_detection_bound", m, n, n_gamma);
            r.alpha = Some(a);
            r.value = Some(total_detection_bound(m, n, n_gamma, a));
            rows.push(r);
        }
        let gamma_h = b.gamma_h.unwrap_or(cfg.link.rho / (2 * m + 1) as f64);
        for &theta in &b.thetas {
            for &t_b in &b.t_b_seconds {
                for &a in &b.alphas {
                    let x = TwinInputs {
                        m,
                        n,
                        n_gamma,
                        alpha: a,
                        theta,
                        t_b,
                        d: b.d,
                        t_c1: b.t_c1,
                        t_c2: b.t_c2,
                        gamma,
                        gamma_h,
                    };
                    let mut r = BoundRow::new("twin_damage_bound", m, n, n_gamma);
                    (r.alpha, r.theta, r.t_b_s) = (Some(a), Some(theta), Some(t_b));
                    match twin_damage_bound(&x) {
                        Ok(v) => r.value = Some(v),
                        Err(e) => r.status = e.to_string(),
                    }
                    rows.push(r);
                }
            }
        }
        for &theta in &b.thetas {
            let rm = r_min_curves(m, n_gamma, theta, cfg.link.rho);
            for (q, v) in [("r_min_clef", rm.clef), ("r_min_eardet", rm.eardet), ("r_min_fm", rm.fm), ("r_min_amf_fm", rm.amf_fm)] {
                let mut r = BoundRow::new(q, m, n_gamma, n_gamma);
                r.theta = Some(theta);
                r.value = Some(v);
                rows.push(r);
            }
        }
    }
    Ok(rows)
}

pub fn cmd_bounds(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<BoundRow>> {
    cfg.link.spec()?;
    cfg.link.rho()?;
    let rows = bound_rows(cfg)?;
    require_dir(out)?;
    write_csv(&out.join("bounds.csv"), &preamble("bounds", cfg, &[]), &rows)?;
    Ok(rows)
}
