//! Recursive large-flow detection over a virtual m-ary counter tree.
//!
//! Only the node on the currently selected root-to-leaf path is resident: `m`
//! counters for levels above the bottom and an `m`-slot cuckoo table at the
//! bottom, where every tracked flow owns its slot.

mod cuckoo;
mod path;
mod shard;

pub use cuckoo::{CuckooTable, Entry, HASHES, MAX_DISPLACEMENTS};
pub use path::{default_depth, PathLayout};
pub use shard::ShardedRlfd;

use rand::Rng;

use crate::detector::{Detector, Footprint};
use crate::error::{config, Error, Result};
use crate::hash::{rng_from_seed, DetRng, KeyedHash};
use crate::model::{Detection, FlowId, FlowSpec, Nanos, Packet};

/// Bottom-table keys in hashed-ID mode keep this many bits.
pub const HASHED_ID_BITS: u32 = 48;

#[derive(Clone, Debug, PartialEq)]
pub struct RlfdConfig {
    pub m: usize,
    pub depth: u32,
    /// Nominal level period T_ℓ.
    pub level_period: Nanos,
    pub spec: FlowSpec,
    /// Each cycle's length is drawn uniformly from [T_c(1−j), T_c(1+j)].
    pub jitter: f64,
    pub seed: u64,
    /// Store 48-bit hashes instead of flow IDs at the bottom level.
    pub hashed_ids: bool,
    pub name: &'static str,
}

impl RlfdConfig {
    pub fn new(m: usize, depth: u32, level_period: Nanos, spec: FlowSpec, seed: u64) -> Result<Self> {
        let cfg = RlfdConfig {
            m,
            depth,
            level_period,
            spec,
            jitter: 0.0,
            seed,
            hashed_ids: false,
            name: "rlfd",
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        PathLayout::new(self.m, self.depth)?;
        if self.level_period == 0 {
            return config("rlfd level period must be positive");
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return config(format!("rlfd jitter {} must lie in [0, 1)", self.jitter));
        }
        Ok(())
    }

    pub fn with_jitter(mut self, jitter: f64) -> Result<Self> {
        self.jitter = jitter;
        self.validate()?;
        Ok(self)
    }

    pub fn named(mut self, name: &'static str) -> Self {
        self.name = name;
        self
    }

    /// Nominal cycle T_c = d·T_ℓ.
    pub fn cycle(&self) -> Nanos {
        self.level_period * self.depth as Nanos
    }

    /// γT_ℓ + β for the nominal period.
    pub fn th_rlfd(&self) -> u128 {
        self.spec.th(self.level_period)
    }
}

/// Draws one cycle length uniformly from [T_c(1−j), T_c(1+j)].
pub fn draw_cycle(nominal: Nanos, jitter: f64, rng: &mut impl Rng) -> Nanos {
    if jitter == 0.0 {
        return nominal;
    }
    let u: f64 = rng.random();
    let c = nominal as f64 * (1.0 - jitter + 2.0 * jitter * u);
    (c.round() as Nanos).max(1)
}

/// Index of a largest counter; ties are broken uniformly at random.
pub fn argmax_uniform(counters: &[u64], rng: &mut impl Rng) -> usize {
    let mut best = 0;
    let mut ties = 0u32;
    let mut max = 0u64;
    for (i, &c) in counters.iter().enumerate() {
        if ties == 0 || c > max {
            max = c;
            best = i;
            ties = 1;
        } else if c == max {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                best = i;
            }
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct Rlfd {
    cfg: RlfdConfig,
    layout: PathLayout,
    rng: DetRng,
    path_key: KeyedHash,
    id_key: KeyedHash,
    level: u32,
    ancestor: u64,
    counters: Vec<u64>,
    table: CuckooTable,
    period: Nanos,
    level_end: Nanos,
    bottom_th: u128,
    last: Nanos,
    cycles: u64,
}

impl Rlfd {
    pub fn new(cfg: RlfdConfig) -> Result<Self> {
        cfg.validate()?;
        let layout = PathLayout::new(cfg.m, cfg.depth)?;
        let mut rng = rng_from_seed(cfg.seed);
        let table = CuckooTable::new(cfg.m, KeyedHash::random(&mut rng));
        let mut r = Rlfd {
            layout,
            rng,
            path_key: KeyedHash::new(0, 0),
            id_key: KeyedHash::new(0, 0),
            level: 1,
            ancestor: 0,
            counters: vec![0; cfg.m],
            table,
            period: cfg.level_period,
            level_end: 0,
            bottom_th: 0,
            last: 0,
            cycles: 0,
            cfg,
        };
        r.start_cycle(0);
        Ok(r)
    }

    fn start_cycle(&mut self, start: Nanos) {
        self.path_key = KeyedHash::random(&mut self.rng);
        let cycle = draw_cycle(self.cfg.cycle(), self.cfg.jitter, &mut self.rng);
        self.period = (cycle / self.cfg.depth as Nanos).max(1);
        self.level = 1;
        self.ancestor = 0;
        self.counters.fill(0);
        self.level_end = start + self.period;
        self.cycles += 1;
        if self.cfg.depth == 1 {
            self.enter_bottom();
        }
    }

    fn enter_bottom(&mut self) {
        self.bottom_th = self.cfg.spec.th(self.period);
        let key = KeyedHash::random(&mut self.rng);
        self.id_key = KeyedHash::random(&mut self.rng);
        self.table.reset(key);
    }

    fn end_level(&mut self) {
        if self.level < self.cfg.depth {
            let idx = argmax_uniform(&self.counters, &mut self.rng);
            self.ancestor = self.layout.extend(self.ancestor, self.level, idx);
            self.level += 1;
            self.counters.fill(0);
            self.level_end += self.period;
            if self.level == self.cfg.depth {
                self.enter_bottom();
            }
        } else {
            let start = self.level_end;
            self.start_cycle(start);
        }
    }

    pub fn config(&self) -> &RlfdConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &PathLayout {
        &self.layout
    }

    /// Current level, 1-based.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn ancestor(&self) -> u64 {
        self.ancestor
    }

    pub fn counters(&self) -> &[u64] {
        &self.counters
    }

    pub fn table(&self) -> &CuckooTable {
        &self.table
    }

    /// Length of each level in the current cycle.
    pub fn period(&self) -> Nanos {
        self.period
    }

    pub fn level_end(&self) -> Nanos {
        self.level_end
    }

    /// Detection threshold γ·period + β of the current cycle's bottom level.
    pub fn bottom_threshold(&self) -> u128 {
        self.bottom_th
    }

    /// Cycles started so far, including the current one.
    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    pub fn flow_code(&self, flow: FlowId) -> u64 {
        self.layout.code(self.path_key.hash(flow.0))
    }

    pub fn in_loaded_node(&self, code: u64) -> Option<usize> {
        self.layout.in_loaded_node(code, self.level, self.ancestor)
    }

    fn bottom_key(&self, flow: FlowId) -> u64 {
        if self.cfg.hashed_ids {
            self.id_key.hash(flow.0) & ((1u64 << HASHED_ID_BITS) - 1)
        } else {
            flow.0
        }
    }
}

impl Detector for Rlfd {
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        if pkt.arrival < self.last {
            return Err(Error::StreamOrder { prev: self.last, got: pkt.arrival });
        }
        self.last = pkt.arrival;
        self.advance(pkt.arrival)?;
        let code = self.flow_code(pkt.flow);
        let Some(idx) = self.in_loaded_node(code) else {
            return Ok(None);
        };
        if self.level < self.cfg.depth {
            self.counters[idx] += pkt.size as u64;
            return Ok(None);
        }
        let key = self.bottom_key(pkt.flow);
        let slot = match self.table.find(key) {
            Some(s) => s,
            None => match self.table.insert(key, &mut self.rng) {
                Some(s) => s,
                None => return Ok(None),
            },
        };
        let th = self.bottom_th;
        let e = self.table.get_mut(slot);
        e.bytes += pkt.size as u64;
        if !e.reported && e.bytes as u128 > th {
            e.reported = true;
            return Ok(Some(Detection { flow: pkt.flow, at: pkt.arrival, by: self.cfg.name }));
        }
        Ok(None)
    }

    fn advance(&mut self, now: Nanos) -> Result<()> {
        while now >= self.level_end {
            self.end_level();
        }
        Ok(())
    }

    fn footprint(&self) -> Footprint {
        Footprint { counters: self.counters.len(), table_slots: self.table.capacity() }
    }

    fn name(&self) -> &'static str {
        self.cfg.name
    }
}
