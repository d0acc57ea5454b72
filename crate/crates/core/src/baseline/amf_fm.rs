//! Serial AMF then Flow Memory: AMF flags candidates, FM confirms them.

use crate::detector::{Detector, Footprint};
use crate::error::{config, Result};
use crate::hash::derive_seed;
use crate::model::{Detection, FlowSpec, Packet};

use super::amf::{Amf, AmfConfig, DEFAULT_STAGES};
use super::fm::{FlowMemory, FmConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmfFmConfig {
    pub amf: AmfConfig,
    pub fm: FmConfig,
}

impl AmfFmConfig {
    /// Half of `m` (rounded down to a multiple of the stage count) to AMF, the rest to FM.
    pub fn split(m: usize, spec: FlowSpec, seed: u64) -> Result<Self> {
        let amf_m = (m / 2) / DEFAULT_STAGES * DEFAULT_STAGES;
        if amf_m == 0 || m - amf_m == 0 {
            return config(format!("amf-fm needs m >= {} counters, got {m}", 2 * DEFAULT_STAGES));
        }
        Ok(AmfFmConfig {
            amf: AmfConfig::new(amf_m, spec, derive_seed(seed, &[0]))?,
            fm: FmConfig::new(m - amf_m, spec, derive_seed(seed, &[1]))?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct AmfFm {
    amf: Amf,
    fm: FlowMemory,
}

impl AmfFm {
    pub fn new(cfg: AmfFmConfig) -> Result<Self> {
        Ok(AmfFm { amf: Amf::new(cfg.amf)?, fm: FlowMemory::new(cfg.fm).named("amf-fm") })
    }

    pub fn amf(&self) -> &Amf {
        &self.amf
    }

    pub fn fm(&self) -> &FlowMemory {
        &self.fm
    }
}

impl Detector for AmfFm {
    /// Every packet updates AMF. Tracked flows are accounted in FM; an untracked
    /// flow is offered to FM only on a packet AMF flags, and that packet is its
    /// first FM byte count.
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        let flagged = self.amf.update(pkt)?;
        if self.fm.is_tracked(pkt.flow) || flagged {
            return self.fm.offer(pkt);
        }
        Ok(None)
    }

    fn footprint(&self) -> Footprint {
        self.amf.footprint() + self.fm.footprint()
    }

    fn name(&self) -> &'static str {
        "amf-fm"
    }
}
