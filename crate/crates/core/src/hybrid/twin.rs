//! Two RLFDs with different, randomly jittered cycle lengths.

use crate::detector::{Detector, Footprint};
use crate::error::{config, Error, Result};
use crate::model::{secs_to_ns, Detection, Nanos, Packet};
use crate::rlfd::{Rlfd, RlfdConfig};

pub const DEFAULT_JITTER: f64 = 0.1;
pub const DEFAULT_ALPHA_TARGET: f64 = 100.0;

/// T_c^(2) = 2·d·γ_h / (α·γ) · T_c^(1).
pub fn twin_cycle2(d: u32, gamma_h: f64, alpha_target: f64, gamma: f64, t_c1: Nanos) -> Result<Nanos> {
    if d == 0 || gamma_h <= 0.0 || alpha_target <= 0.0 || gamma <= 0.0 || t_c1 == 0 {
        return Err(Error::Domain(format!(
            "cycle-2 inputs must be positive: d = {d}, gamma_h = {gamma_h}, alpha = {alpha_target}, gamma = {gamma}, t_c1 = {t_c1} ns"
        )));
    }
    let factor = 2.0 * d as f64 * gamma_h / (alpha_target * gamma);
    Ok(secs_to_ns(factor * t_c1 as f64 / 1e9))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwinRlfdConfig {
    pub rlfd1: RlfdConfig,
    pub rlfd2: RlfdConfig,
}

impl TwinRlfdConfig {
    pub fn new(rlfd1: RlfdConfig, rlfd2: RlfdConfig) -> Result<Self> {
        if rlfd2.cycle() <= rlfd1.cycle() {
            return config(format!(
                "twin-rlfd cycle 2 ({} ns) must be longer than cycle 1 ({} ns)",
                rlfd2.cycle(),
                rlfd1.cycle()
            ));
        }
        Ok(TwinRlfdConfig { rlfd1: rlfd1.named("rlfd1"), rlfd2: rlfd2.named("rlfd2") })
    }

    /// Same m, depth and spec for both; level periods T_c/d.
    pub fn from_cycles(base: RlfdConfig, t_c1: Nanos, t_c2: Nanos, seed2: u64) -> Result<Self> {
        let d = base.depth as Nanos;
        let mut r1 = base.clone();
        r1.level_period = t_c1 / d;
        let mut r2 = base;
        r2.level_period = t_c2 / d;
        r2.seed = seed2;
        r1.validate()?;
        r2.validate()?;
        Self::new(r1, r2)
    }
}

#[derive(Clone, Debug)]
pub struct TwinRlfd {
    r1: Rlfd,
    r2: Rlfd,
}

impl TwinRlfd {
    pub fn new(cfg: TwinRlfdConfig) -> Result<Self> {
        Ok(TwinRlfd { r1: Rlfd::new(cfg.rlfd1)?, r2: Rlfd::new(cfg.rlfd2)? })
    }

    pub fn rlfd1(&self) -> &Rlfd {
        &self.r1
    }

    pub fn rlfd2(&self) -> &Rlfd {
        &self.r2
    }
}

impl Detector for TwinRlfd {
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        let a = self.r1.process(pkt)?;
        let b = self.r2.process(pkt)?;
        Ok(a.or(b))
    }

    fn advance(&mut self, now: Nanos) -> Result<()> {
        self.r1.advance(now)?;
        self.r2.advance(now)
    }

    fn footprint(&self) -> Footprint {
        self.r1.footprint() + self.r2.footprint()
    }

    fn name(&self) -> &'static str {
        "twin-rlfd"
    }
}
