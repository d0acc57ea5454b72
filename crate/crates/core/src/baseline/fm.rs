//! Flow Memory: exact per-flow leaky buckets for at most `m` flows, with
//! uniform random eviction among the `m` tracked flows and the newcomer.

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::detector::{Detector, Footprint};
use crate::error::{config, Error, Result};
use crate::hash::{rng_from_seed, DetRng};
use crate::model::{Detection, FlowId, FlowSpec, LeakyBucket, Nanos, Packet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FmConfig {
    pub m: usize,
    pub spec: FlowSpec,
    pub seed: u64,
}

impl FmConfig {
    pub fn new(m: usize, spec: FlowSpec, seed: u64) -> Result<Self> {
        if m == 0 {
            return config("flow memory needs at least one entry");
        }
        Ok(FmConfig { m, spec, seed })
    }
}

#[derive(Clone, Copy, Debug)]
struct Tracked {
    flow: FlowId,
    bucket: LeakyBucket,
    reported: bool,
}

/// Result of offering an untracked flow to a full table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admission {
    Tracked,
    Admitted { evicted: Option<FlowId> },
    Rejected,
}

#[derive(Clone, Debug)]
pub struct FlowMemory {
    cfg: FmConfig,
    entries: Vec<Tracked>,
    index: FxHashMap<FlowId, usize>,
    rng: DetRng,
    last: Nanos,
    name: &'static str,
}

impl FlowMemory {
    pub fn new(cfg: FmConfig) -> Self {
        FlowMemory {
            entries: Vec::with_capacity(cfg.m),
            index: FxHashMap::default(),
            rng: rng_from_seed(cfg.seed),
            last: 0,
            name: "fm",
            cfg,
        }
    }

    pub fn named(mut self, name: &'static str) -> Self {
        self.name = name;
        self
    }

    pub fn config(&self) -> &FmConfig {
        &self.cfg
    }

    pub fn is_tracked(&self, flow: FlowId) -> bool {
        self.index.contains_key(&flow)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Makes room for `flow` if it is untracked. When the table is full one of
    /// the m+1 candidates is excluded uniformly at random.
    pub fn admit(&mut self, flow: FlowId, now: Nanos) -> Admission {
        if self.index.contains_key(&flow) {
            return Admission::Tracked;
        }
        let fresh = Tracked { flow, bucket: LeakyBucket::starting_at(self.cfg.spec, now), reported: false };
        if self.entries.len() < self.cfg.m {
            self.index.insert(flow, self.entries.len());
            self.entries.push(fresh);
            return Admission::Admitted { evicted: None };
        }
        let pick = self.rng.random_range(0..=self.cfg.m);
        if pick == self.cfg.m {
            return Admission::Rejected;
        }
        let old = std::mem::replace(&mut self.entries[pick], fresh);
        self.index.remove(&old.flow);
        self.index.insert(flow, pick);
        Admission::Admitted { evicted: Some(old.flow) }
    }

    /// Adds a packet of an already tracked flow; None if untracked.
    pub fn account(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        let Some(&i) = self.index.get(&pkt.flow) else { return Ok(None) };
        let e = &mut self.entries[i];
        if e.bucket.update_packet(pkt)? && !e.reported {
            e.reported = true;
            return Ok(Some(Detection { flow: pkt.flow, at: pkt.arrival, by: self.name }));
        }
        Ok(None)
    }

    fn check_order(&mut self, at: Nanos) -> Result<()> {
        if at < self.last {
            return Err(Error::StreamOrder { prev: self.last, got: at });
        }
        self.last = at;
        Ok(())
    }

    /// Admission plus accounting, for callers that gate which packets reach FM.
    pub fn offer(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        self.check_order(pkt.arrival)?;
        match self.admit(pkt.flow, pkt.arrival) {
            Admission::Rejected => Ok(None),
            _ => self.account(pkt),
        }
    }
}

impl Detector for FlowMemory {
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        self.offer(pkt)
    }

    fn footprint(&self) -> Footprint {
        Footprint { counters: self.cfg.m, table_slots: 0 }
    }

    fn name(&self) -> &'static str {
        self.name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> FlowSpec {
        FlowSpec::per_second(12_500, 3028).unwrap()
    }

    #[test]
    fn first_flow_always_admitted() {
        for seed in 0..20 {
            let mut fm = FlowMemory::new(FmConfig::new(1, spec(), seed).unwrap());
            assert_eq!(fm.admit(FlowId(5), 0), Admission::Admitted { evicted: None });
        }
    }

    #[test]
    fn eviction_is_uniform_over_candidates() {
        let m = 4;
        let mut counts = [0u32; 5];
        let mut fm = FlowMemory::new(FmConfig::new(m, spec(), 8).unwrap());
        for f in 0..m as u64 {
            fm.admit(FlowId(f), 0);
        }
        let trials = 50_000;
        for k in 0..trials {
            let mut probe = fm.clone();
            probe.rng = rng_from_seed(k);
            match probe.admit(FlowId(99), 0) {
                Admission::Rejected => counts[m] += 1,
                Admission::Admitted { evicted: Some(f) } => counts[f.0 as usize] += 1,
                other => panic!("{other:?}"),
            }
        }
        // each of m+1 candidates with probability 1/(m+1)
        let p = 1.0 / (m + 1) as f64;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - trials as f64 * p).abs() < 5.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn tracked_flow_over_spec_is_reported_once() {
        let mut fm = FlowMemory::new(FmConfig::new(2, spec(), 1).unwrap());
        let hits = (0..10u64).filter(|&k| fm.process(&Packet::new(3, 1000, k)).unwrap().is_some()).count();
        assert_eq!(hits, 1);
    }
}
