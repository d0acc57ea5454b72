//! Arbitrary-window multistage filter: parallel stages of hashed leaky buckets.

use crate::detector::{Detector, Footprint};
use crate::error::{config, Error, Result};
use crate::hash::{rng_from_seed, KeyedHash};
use crate::model::{Detection, FlowSpec, LeakyBucket, Nanos, Packet};

pub const DEFAULT_STAGES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmfConfig {
    /// Total buckets across all stages.
    pub m: usize,
    pub stages: usize,
    pub spec: FlowSpec,
    /// Raise only the smallest buckets on update. Off by default.
    pub conservative: bool,
    pub seed: u64,
}

impl AmfConfig {
    pub fn new(m: usize, spec: FlowSpec, seed: u64) -> Result<Self> {
        let c = AmfConfig { m, stages: DEFAULT_STAGES, spec, conservative: false, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages == 0 {
            return config("amf needs at least one stage");
        }
        if self.m < self.stages || self.m % self.stages != 0 {
            return config(format!("amf m = {} must be a positive multiple of stages = {}", self.m, self.stages));
        }
        Ok(())
    }

    /// Buckets per stage, m'.
    pub fn per_stage(&self) -> usize {
        self.m / self.stages
    }
}

#[derive(Clone, Debug)]
pub struct Amf {
    cfg: AmfConfig,
    keys: Vec<KeyedHash>,
    // stage-major: stage s occupies [s·m', (s+1)·m')
    buckets: Vec<LeakyBucket>,
    last: Nanos,
}

impl Amf {
    pub fn new(cfg: AmfConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng_from_seed(cfg.seed);
        let keys = (0..cfg.stages).map(|_| KeyedHash::random(&mut rng)).collect();
        Ok(Amf { buckets: vec![LeakyBucket::new(cfg.spec); cfg.m], keys, cfg, last: 0 })
    }

    pub fn config(&self) -> &AmfConfig {
        &self.cfg
    }

    fn bucket_index(&self, stage: usize, flow: u64) -> usize {
        let w = self.cfg.per_stage();
        stage * w + ((self.keys[stage].hash(flow) as u128 * w as u128) >> 64) as usize
    }

    /// Updates one bucket per stage; true iff every stage's bucket exceeds β.
    pub fn update(&mut self, pkt: &Packet) -> Result<bool> {
        if pkt.arrival < self.last {
            return Err(Error::StreamOrder { prev: self.last, got: pkt.arrival });
        }
        self.last = pkt.arrival;
        let idx: Vec<usize> = (0..self.cfg.stages).map(|s| self.bucket_index(s, pkt.flow.0)).collect();
        if self.cfg.conservative {
            for &i in &idx {
                self.buckets[i].drain_to(pkt.arrival)?;
            }
            let add = self.buckets[idx[0]].raw_units(pkt.size as u64);
            let floor = idx.iter().map(|&i| self.buckets[i].raw_level()).min().unwrap_or(0) + add;
            for &i in &idx {
                let b = &mut self.buckets[i];
                b.set_raw_level(b.raw_level().max(floor));
            }
            return Ok(idx.iter().all(|&i| self.buckets[i].violated()));
        }
        let mut all = true;
        for &i in &idx {
            all &= self.buckets[i].update_packet(pkt)?;
        }
        Ok(all)
    }
}

impl Detector for Amf {
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        Ok(self.update(pkt)?.then_some(Detection { flow: pkt.flow, at: pkt.arrival, by: "amf" }))
    }

    fn footprint(&self) -> Footprint {
        Footprint { counters: self.buckets.len(), table_slots: 0 }
    }

    fn name(&self) -> &'static str {
        "amf"
    }
}
