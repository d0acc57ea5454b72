//! Deterministic arbitrary-window detector.
//!
//! `m` counters run a byte-weighted frequent-items update. Idle link capacity
//! is fed in as virtual traffic from flows that never repeat, so counters of
//! flows running below γ_h = ρ/(m+1) keep draining even when the link is
//! quiet. Virtual traffic is treated as a fluid: with `j` counters occupied by
//! real flows, each virtual byte lowers every occupied counter by 1/(m−j+1).
//! Uniform decrements are applied through a global offset.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;

use crate::detector::{Detector, Footprint};
use crate::error::{config, Error, Result};
use crate::model::{Detection, FlowId, FlowSpec, Nanos, Packet, Rate, DEFAULT_MAX_PACKET};

/// Fixed-point scale for counter values (fractions of a byte).
const SCALE: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EardetConfig {
    pub m: usize,
    pub spec: FlowSpec,
    pub rho: Rate,
    pub gamma_h: Rate,
    pub beta_th: u64,
    pub max_packet: u32,
}

impl EardetConfig {
    /// γ_h = ρ/(m+1); beta_th is the no-FP floor.
    pub fn new(m: usize, spec: FlowSpec, rho: Rate) -> Result<Self> {
        Self::with_max_packet(m, spec, rho, DEFAULT_MAX_PACKET)
    }

    pub fn with_max_packet(m: usize, spec: FlowSpec, rho: Rate, max_packet: u32) -> Result<Self> {
        if m < 1 {
            return config("eardet needs at least one counter");
        }
        let gamma_h = rho.scaled(1, m as u64 + 1)?;
        if gamma_h.ratio(&spec.gamma) <= 1.0 {
            return config(format!(
                "eardet gamma_h = rho/(m+1) = {gamma_h} must exceed gamma = {} (m = {m} too large)",
                spec.gamma
            ));
        }
        let mut cfg = EardetConfig { m, spec, rho, gamma_h, beta_th: 0, max_packet };
        cfg.beta_th = cfg.no_fp_floor();
        Ok(cfg)
    }

    /// β + γ_h·β/γ, a looser threshold that grows with γ_h. Pass it to
    /// `with_beta_th` to use it instead of the floor.
    pub fn scaled_beta_th(&self) -> u64 {
        let s = &self.spec;
        let v = s.beta as u128
            + s.beta as u128 * self.gamma_h.bytes() as u128 * s.gamma.per_ns() as u128
                / (self.gamma_h.per_ns() as u128 * s.gamma.bytes() as u128);
        (v as u64).max(self.no_fp_floor())
    }

    /// Overrides the counter threshold. Values below the no-FP floor are rejected.
    pub fn with_beta_th(mut self, beta_th: u64) -> Result<Self> {
        let floor = self.no_fp_floor();
        if beta_th < floor {
            return config(format!(
                "eardet beta_th {beta_th} is below {floor}, the smallest threshold that keeps compliant flows undetected"
            ));
        }
        self.beta_th = beta_th;
        Ok(self)
    }

    /// Smallest threshold for which a flow within γt+β can never be reported:
    /// (βρ + (m−1)γα)/(ρ − mγ), α the largest packet, plus a byte of slack
    /// for fixed-point rounding.
    pub fn no_fp_floor(&self) -> u64 {
        let rho = self.rho.as_f64();
        let g = self.spec.gamma.as_f64();
        let m = self.m as f64;
        let num = self.spec.beta as f64 * rho + (m - 1.0) * g * self.max_packet as f64;
        (num / (rho - m * g)).ceil() as u64 + 1
    }
}

#[derive(Clone, Copy, Debug)]
struct Slot {
    flow: FlowId,
    // value = abs − offset
    abs: u128,
    reported: bool,
}

#[derive(Clone, Debug)]
pub struct Eardet {
    cfg: EardetConfig,
    slots: Vec<Option<Slot>>,
    index: FxHashMap<FlowId, u32>,
    by_value: BTreeSet<(u128, u32)>,
    free: Vec<u32>,
    offset: u128,
    threshold: u128,
    last: Option<(Nanos, u32)>,
}

impl Eardet {
    pub fn new(cfg: EardetConfig) -> Self {
        Eardet {
            cfg,
            slots: vec![None; cfg.m],
            index: FxHashMap::default(),
            by_value: BTreeSet::new(),
            free: (0..cfg.m as u32).rev().collect(),
            offset: 0,
            threshold: cfg.beta_th as u128 * SCALE,
            last: None,
        }
    }

    pub fn config(&self) -> &EardetConfig {
        &self.cfg
    }

    /// Occupied counters as (flow, value in bytes).
    pub fn counters(&self) -> Vec<(FlowId, f64)> {
        self.slots
            .iter()
            .flatten()
            .map(|s| (s.flow, (s.abs - self.offset) as f64 / SCALE as f64))
            .collect()
    }

    fn release_zeros(&mut self) {
        while let Some(&(abs, i)) = self.by_value.first() {
            if abs > self.offset {
                break;
            }
            self.by_value.pop_first();
            let slot = self.slots[i as usize].take().expect("ordered slot is occupied");
            self.index.remove(&slot.flow);
            self.free.push(i);
        }
    }

    /// Spreads `v` units of virtual traffic over the occupied counters.
    fn apply_virtual(&mut self, mut v: u128) {
        while v > 0 {
            let Some(&(abs, _)) = self.by_value.first() else { return };
            let per = (self.cfg.m - self.by_value.len() + 1) as u128;
            let min_val = abs - self.offset;
            let need = min_val * per;
            if v >= need {
                self.offset += min_val;
                v -= need;
                self.release_zeros();
            } else {
                self.offset += v / per;
                return;
            }
        }
    }

    fn occupy(&mut self, flow: FlowId, units: u128) -> u32 {
        let i = self.free.pop().expect("caller checked for a free counter");
        let abs = self.offset + units;
        self.slots[i as usize] = Some(Slot { flow, abs, reported: false });
        self.index.insert(flow, i);
        self.by_value.insert((abs, i));
        i
    }

    fn check(&mut self, i: u32, at: Nanos) -> Option<Detection> {
        let slot = self.slots[i as usize].as_mut().expect("occupied");
        if !slot.reported && slot.abs - self.offset > self.threshold {
            slot.reported = true;
            return Some(Detection { flow: slot.flow, at, by: "eardet" });
        }
        None
    }
}

impl Detector for Eardet {
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        let t = pkt.arrival;
        if let Some((prev, prev_size)) = self.last {
            if t < prev {
                return Err(Error::StreamOrder { prev, got: t });
            }
            let carried = (t - prev) as u128 * self.cfg.rho.bytes() as u128 * SCALE
                / self.cfg.rho.per_ns() as u128;
            let idle = carried.saturating_sub(prev_size as u128 * SCALE);
            self.apply_virtual(idle);
        }
        self.last = Some((t, pkt.size));
        let units = pkt.size as u128 * SCALE;

        if let Some(&i) = self.index.get(&pkt.flow) {
            let slot = self.slots[i as usize].as_mut().expect("indexed slot is occupied");
            if slot.reported {
                // Already reported: its traffic no longer counts, as if dropped upstream.
                self.apply_virtual(units);
                return Ok(None);
            }
            self.by_value.remove(&(slot.abs, i));
            slot.abs += units;
            self.by_value.insert((slot.abs, i));
            return Ok(self.check(i, t));
        }
        if !self.free.is_empty() {
            let i = self.occupy(pkt.flow, units);
            return Ok(self.check(i, t));
        }
        let mut residual = units;
        while residual > 0 {
            let &(abs, _) = self.by_value.first().expect("all counters occupied");
            let delta = residual.min(abs - self.offset);
            self.offset += delta;
            residual -= delta;
            self.release_zeros();
            if residual > 0 && !self.free.is_empty() {
                let i = self.occupy(pkt.flow, residual);
                return Ok(self.check(i, t));
            }
        }
        Ok(None)
    }

    fn footprint(&self) -> Footprint {
        Footprint { counters: self.slots.len(), table_slots: 0 }
    }

    fn name(&self) -> &'static str {
        "eardet"
    }
}
