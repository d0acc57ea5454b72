//! EARDet and Twin-RLFD in parallel behind one blacklist.

use crate::detector::{Detector, Footprint};
use crate::eardet::{Eardet, EardetConfig};
use crate::error::{config, Result};
use crate::hash::derive_seed;
use crate::model::{secs_to_ns, Blacklist, Detection, FlowSpec, Nanos, Packet, Rate};
use crate::rlfd::{default_depth, RlfdConfig};

use super::presets::preset_for;
use super::twin::{twin_cycle2, TwinRlfd, TwinRlfdConfig, DEFAULT_ALPHA_TARGET, DEFAULT_JITTER};

/// Where the second RLFD's cycle length comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cycle2 {
    /// Bundled preset for the total counter budget.
    Preset,
    /// The cycle-2 formula with the given α target.
    Formula { alpha_target: f64 },
}

impl Default for Cycle2 {
    fn default() -> Self {
        Cycle2::Formula { alpha_target: DEFAULT_ALPHA_TARGET }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClefConfig {
    pub eardet: EardetConfig,
    pub twin: TwinRlfdConfig,
}

/// Inputs for building a CLEF from a counter budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClefBuild {
    pub m: usize,
    pub spec: FlowSpec,
    pub rho: Rate,
    /// Expected concurrent flows, for the default depth.
    pub n: u64,
    pub seed: u64,
    pub jitter: f64,
    pub cycle2: Cycle2,
    pub depth: Option<u32>,
    pub max_packet: u32,
}

impl ClefBuild {
    pub fn new(m: usize, spec: FlowSpec, rho: Rate, n: u64, seed: u64) -> Self {
        ClefBuild {
            m,
            spec,
            rho,
            n,
            seed,
            jitter: DEFAULT_JITTER,
            cycle2: Cycle2::default(),
            depth: None,
            max_packet: crate::model::DEFAULT_MAX_PACKET,
        }
    }
}

impl ClefConfig {
    /// Splits `m` into ⌊m/4⌋ counters per RLFD and the rest for EARDet. Level
    /// period of the first RLFD is β/γ.
    pub fn build(b: ClefBuild) -> Result<Self> {
        let per_rlfd = b.m / 4;
        if per_rlfd < 2 {
            return config(format!("clef needs m >= 8 counters, got {}", b.m));
        }
        let eardet_m = b.m - 2 * per_rlfd;
        let eardet = EardetConfig::with_max_packet(eardet_m, b.spec, b.rho, b.max_packet)?;
        let preset = match b.cycle2 {
            Cycle2::Preset => Some(preset_for(b.m)?),
            Cycle2::Formula { .. } => None,
        };
        let d = b.depth.or(preset.map(|p| p.twin_d)).unwrap_or_else(|| default_depth(per_rlfd, b.n));
        let t_ell = b.spec.burst_drain_time();
        let t_c1 = t_ell * d as Nanos;
        let t_c2 = match (b.cycle2, preset) {
            (_, Some(p)) => secs_to_ns(p.twin_t_c2),
            (Cycle2::Formula { alpha_target }, None) => {
                twin_cycle2(d, eardet.gamma_h.as_f64(), alpha_target, b.spec.gamma.as_f64(), t_c1)?
            }
            (Cycle2::Preset, None) => unreachable!("preset looked up above"),
        };
        let base = RlfdConfig::new(per_rlfd, d, t_ell, b.spec, derive_seed(b.seed, &[1]))?.with_jitter(b.jitter)?;
        let twin = TwinRlfdConfig::from_cycles(base, t_c1, t_c2, derive_seed(b.seed, &[2]))?;
        Ok(ClefConfig { eardet, twin })
    }

    pub fn total_counters(&self) -> usize {
        self.eardet.m + self.twin.rlfd1.m + self.twin.rlfd2.m
    }
}

#[derive(Clone, Debug)]
pub struct Clef {
    eardet: Eardet,
    twin: TwinRlfd,
    blacklist: Blacklist,
}

impl Clef {
    pub fn new(cfg: ClefConfig) -> Result<Self> {
        Ok(Clef { eardet: Eardet::new(cfg.eardet), twin: TwinRlfd::new(cfg.twin)?, blacklist: Blacklist::new() })
    }

    pub fn eardet(&self) -> &Eardet {
        &self.eardet
    }

    pub fn twin(&self) -> &TwinRlfd {
        &self.twin
    }

    pub fn blacklist(&self) -> &Blacklist {
        &self.blacklist
    }
}

impl Detector for Clef {
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        if self.blacklist.contains(pkt.flow) {
            return Ok(None);
        }
        let e = self.eardet.process(pkt)?;
        let t = self.twin.process(pkt)?;
        let hit = e.or(t);
        if let Some(d) = hit {
            self.blacklist.insert(d.flow, d.at)?;
        }
        Ok(hit)
    }

    fn advance(&mut self, now: Nanos) -> Result<()> {
        self.twin.advance(now)
    }

    fn footprint(&self) -> Footprint {
        self.eardet.footprint() + self.twin.footprint()
    }

    fn name(&self) -> &'static str {
        "clef"
    }
}
