//! Shared value types: time, rates, flow specifications, leaky buckets and the blacklist.

use std::fmt;
use std::sync::{Arc, RwLock};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

/// Nanoseconds since simulation epoch 0.
pub type Nanos = u64;

pub const NS_PER_SEC: u64 = 1_000_000_000;

/// Default largest packet on the wire, in bytes.
pub const DEFAULT_MAX_PACKET: u32 = 1514;

/// Converts seconds to nanoseconds, rounding to the nearest nanosecond.
pub fn secs_to_ns(secs: f64) -> Nanos {
    (secs * NS_PER_SEC as f64).round() as Nanos
}

pub fn ns_to_secs(ns: Nanos) -> f64 {
    ns as f64 / NS_PER_SEC as f64
}

/// Opaque flow identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub u64);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Packet {
    pub flow: FlowId,
    pub size: u32,
    pub arrival: Nanos,
}

impl Packet {
    pub fn new(flow: u64, size: u32, arrival: Nanos) -> Self {
        Packet { flow: FlowId(flow), size, arrival }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A rate held as an exact fraction: `bytes` per `per_ns` nanoseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rate {
    bytes: u64,
    per_ns: u64,
}

impl Rate {
    pub fn new(bytes: u64, per_ns: u64) -> Result<Rate> {
        if bytes == 0 || per_ns == 0 {
            return config(format!("rate {bytes}/{per_ns}ns must be positive"));
        }
        let g = gcd(bytes as u128, per_ns as u128) as u64;
        Ok(Rate { bytes: bytes / g, per_ns: per_ns / g })
    }

    /// Whole bytes per second.
    pub fn per_second(bytes: u64) -> Result<Rate> {
        Rate::new(bytes, NS_PER_SEC)
    }

    /// Bytes per second given as a real number; kept to a millibyte per second.
    pub fn from_f64(bytes_per_sec: f64) -> Result<Rate> {
        if !(bytes_per_sec.is_finite() && bytes_per_sec > 0.0) {
            return config(format!("rate {bytes_per_sec} B/s must be positive and finite"));
        }
        let milli = (bytes_per_sec * 1000.0).round() as u64;
        Rate::new(milli.max(1), NS_PER_SEC * 1000)
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn per_ns(&self) -> u64 {
        self.per_ns
    }

    pub fn as_f64(&self) -> f64 {
        self.bytes as f64 * NS_PER_SEC as f64 / self.per_ns as f64
    }

    /// Bytes carried in `ns`, rounded down.
    pub fn bytes_in(&self, ns: Nanos) -> u128 {
        ns as u128 * self.bytes as u128 / self.per_ns as u128
    }

    /// Nanoseconds needed to carry `bytes`, rounded up.
    pub fn ns_for(&self, bytes: u128) -> u128 {
        (bytes * self.per_ns as u128).div_ceil(self.bytes as u128)
    }

    /// `self * num / den`, exact.
    pub fn scaled(&self, num: u64, den: u64) -> Result<Rate> {
        let b = self.bytes as u128 * num as u128;
        let p = self.per_ns as u128 * den as u128;
        if b == 0 || p == 0 {
            return config("scaled rate must be positive");
        }
        let g = gcd(b, p);
        let (b, p) = (b / g, p / g);
        if b > u64::MAX as u128 || p > u64::MAX as u128 {
            return config("scaled rate does not fit in 64-bit terms");
        }
        Ok(Rate { bytes: b as u64, per_ns: p as u64 })
    }

    /// `self / other` as a real number.
    pub fn ratio(&self, other: &Rate) -> f64 {
        (self.bytes as f64 * other.per_ns as f64) / (self.per_ns as f64 * other.bytes as f64)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} B/s", self.as_f64())
    }
}

/// Leaky-bucket descriptor TH(t) = γt + β.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowSpec {
    pub gamma: Rate,
    pub beta: u64,
}

impl FlowSpec {
    pub fn new(gamma: Rate, beta: u64) -> Result<FlowSpec> {
        if beta == 0 {
            return config("beta must be positive");
        }
        Ok(FlowSpec { gamma, beta })
    }

    /// Whole bytes per second and a burst allowance.
    pub fn per_second(gamma: u64, beta: u64) -> Result<FlowSpec> {
        FlowSpec::new(Rate::per_second(gamma)?, beta)
    }

    /// γ·t + β with γ·t rounded down.
    pub fn th(&self, t: Nanos) -> u128 {
        self.gamma.bytes_in(t) + self.beta as u128
    }

    /// β/γ, the time a full burst takes to drain, rounded up to a nanosecond.
    pub fn burst_drain_time(&self) -> Nanos {
        self.gamma.ns_for(self.beta as u128) as Nanos
    }
}

pub fn th(spec: &FlowSpec, t: Nanos) -> u128 {
    spec.th(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkConfig {
    pub rho: Rate,
}

impl LinkConfig {
    pub fn new(rho: Rate, spec: &FlowSpec) -> Result<LinkConfig> {
        let link = LinkConfig { rho };
        if link.n_gamma(spec) < 1 {
            return config("link capacity must be at least gamma");
        }
        Ok(link)
    }

    /// ⌊ρ/γ⌋: how many flows at exactly γ fill the link.
    pub fn n_gamma(&self, spec: &FlowSpec) -> u64 {
        let num = self.rho.bytes as u128 * spec.gamma.per_ns as u128;
        let den = self.rho.per_ns as u128 * spec.gamma.bytes as u128;
        (num / den) as u64
    }
}

/// Leaky bucket draining at γ with capacity β. The level is held exactly,
/// scaled by the rate denominator so drains never round.
#[derive(Clone, Copy, Debug)]
pub struct LeakyBucket {
    level: u128,
    last_update: Nanos,
    spec: FlowSpec,
}

impl LeakyBucket {
    pub fn new(spec: FlowSpec) -> Self {
        LeakyBucket { level: 0, last_update: 0, spec }
    }

    /// A bucket whose drain clock starts at `now`.
    pub fn starting_at(spec: FlowSpec, now: Nanos) -> Self {
        LeakyBucket { level: 0, last_update: now, spec }
    }

    fn unit(&self) -> u128 {
        self.spec.gamma.per_ns as u128
    }

    pub(crate) fn drain_to(&mut self, now: Nanos) -> Result<()> {
        if now < self.last_update {
            return Err(Error::StreamOrder { prev: self.last_update, got: now });
        }
        let drained = (now - self.last_update) as u128 * self.spec.gamma.bytes as u128;
        self.level = self.level.saturating_sub(drained);
        self.last_update = now;
        Ok(())
    }

    /// Drains to `at`, adds `size` bytes, and reports whether the level exceeds β.
    pub fn update(&mut self, at: Nanos, size: u64) -> Result<bool> {
        self.drain_to(at)?;
        self.level += size as u128 * self.unit();
        Ok(self.violated())
    }

    pub fn update_packet(&mut self, pkt: &Packet) -> Result<bool> {
        self.update(pkt.arrival, pkt.size as u64)
    }

    pub fn violated(&self) -> bool {
        self.level > self.spec.beta as u128 * self.unit()
    }

    /// Current fill in bytes as of the last update.
    pub fn level_bytes(&self) -> f64 {
        self.level as f64 / self.unit() as f64
    }

    pub(crate) fn raw_level(&self) -> u128 {
        self.level
    }

    pub(crate) fn set_raw_level(&mut self, level: u128) {
        self.level = level;
    }

    pub(crate) fn raw_units(&self, bytes: u64) -> u128 {
        bytes as u128 * self.unit()
    }

    pub fn last_update(&self) -> Nanos {
        self.last_update
    }
}

/// Table of detected flows with the time of first detection.
#[derive(Clone, Debug, Default)]
pub struct Blacklist {
    entries: FxHashMap<FlowId, Nanos>,
    capacity: Option<usize>,
}

/// A blacklist shared between threads: many readers, one writer.
pub type SharedBlacklist = Arc<RwLock<Blacklist>>;

impl Blacklist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity_limit(capacity: usize) -> Self {
        Blacklist { entries: FxHashMap::default(), capacity: Some(capacity) }
    }

    /// Records `flow` as detected at `at`. Returns true on first insertion;
    /// repeated inserts keep the original time.
    pub fn insert(&mut self, flow: FlowId, at: Nanos) -> Result<bool> {
        if self.entries.contains_key(&flow) {
            return Ok(false);
        }
        if let Some(cap) = self.capacity {
            if self.entries.len() >= cap {
                return Err(Error::BlacklistFull { capacity: cap, flow });
            }
        }
        self.entries.insert(flow, at);
        Ok(true)
    }

    pub fn contains(&self, flow: FlowId) -> bool {
        self.entries.contains_key(&flow)
    }

    pub fn detected_at(&self, flow: FlowId) -> Option<Nanos> {
        self.entries.get(&flow).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A flow reported as large.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Detection {
    pub flow: FlowId,
    pub at: Nanos,
    /// Component that fired, e.g. "eardet" or "rlfd1".
    pub by: &'static str,
}
