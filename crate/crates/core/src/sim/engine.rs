//! Discrete-event loop: merges flows, enforces the blacklist, feeds a detector
//! and keeps a per-flow ledger for damage.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::detector::Detector;
use crate::error::{Error, Result};
use crate::model::{Blacklist, Detection, FlowId, FlowSpec, Nanos, Packet, Rate};

use super::damage::{fp_damage, overuse, DamageReport};
use super::traffic::{attack_id, is_attack, AttackFlow, AttackPattern, BackgroundConfig, ConstantFlow};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlowRecord {
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub first: Nanos,
    pub detected: Option<Nanos>,
}

/// Blacklist enforcement and the per-flow ledger shared by simulation and replay.
#[derive(Debug, Default)]
pub struct Scorer {
    blacklist: Blacklist,
    flows: FxHashMap<FlowId, FlowRecord>,
    packets: u64,
    detections: Vec<(FlowId, Nanos)>,
}

impl Scorer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops the packet if its flow is blacklisted, otherwise hands it to `det`.
    pub fn offer<D: Detector + ?Sized>(&mut self, det: &mut D, pkt: &Packet) -> Result<Option<Detection>> {
        self.packets += 1;
        let size = pkt.size as u64;
        let rec = self.flows.entry(pkt.flow).or_insert(FlowRecord { first: pkt.arrival, ..FlowRecord::default() });
        rec.generated += size;
        if self.blacklist.contains(pkt.flow) {
            rec.dropped += size;
            return Ok(None);
        }
        rec.delivered += size;
        let hit = det.process(pkt)?;
        if let Some(d) = hit {
            if self.blacklist.insert(d.flow, d.at)? {
                self.detections.push((d.flow, d.at));
                match self.flows.get_mut(&d.flow) {
                    Some(r) => r.detected = Some(d.at),
                    None => return Err(Error::Invariant(format!("detected flow {} never seen", d.flow))),
                }
            }
        }
        Ok(hit)
    }

    pub fn flows(&self) -> &FxHashMap<FlowId, FlowRecord> {
        &self.flows
    }

    pub fn blacklist(&self) -> &Blacklist {
        &self.blacklist
    }

    /// Scores the run. Attack flows are recognised by their ID bit;
    /// `legit_rate` is the nominal rate blocked for a falsely detected flow.
    pub fn report(&self, spec: &FlowSpec, legit_rate: Rate, horizon: Nanos) -> DamageReport {
        let mut r = DamageReport { packets: self.packets, ..DamageReport::default() };
        let mut missed = 0u64;
        let mut d_over = 0u128;
        for (&f, rec) in &self.flows {
            r.delivered_bytes += rec.delivered;
            r.dropped_bytes += rec.dropped;
            if is_attack(f) {
                r.attack_flows += 1;
                let cut = rec.detected.map_or(horizon, |t| t.min(horizon));
                d_over += overuse(spec, rec.delivered, rec.first, cut);
                if rec.detected.is_none() {
                    missed += 1;
                }
            } else if let Some(t) = rec.detected {
                r.fp_count += 1;
                r.d_fp += fp_damage(legit_rate, t, horizon);
            }
        }
        r.d_over = d_over as f64;
        r.fn_ratio = if r.attack_flows == 0 { 0.0 } else { missed as f64 / r.attack_flows as f64 };
        r.detections = self.detections.clone();
        r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub spec: FlowSpec,
    pub rho: Rate,
    pub background: BackgroundConfig,
    /// One pattern per attack flow.
    pub attacks: Vec<AttackPattern>,
    pub horizon: Nanos,
    /// Start each attack flow at a uniform offset within its burst period.
    pub attack_phase: bool,
    /// Keep every generated packet, blacklisted or not, for later replay.
    pub record: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        for a in &self.attacks {
            a.validate(self.rho)?;
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if self.background.packet_size == 0 {
            return Err(Error::Config("legitimate packet size must be positive".into()));
        }
        Ok(())
    }

    pub fn attack_load(&self) -> f64 {
        self.attacks.iter().map(|a| a.rate.as_f64()).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub report: DamageReport,
    pub flows: FxHashMap<FlowId, FlowRecord>,
    /// Generated stream in arrival order, if recorded.
    pub trace: Option<Vec<Packet>>,
}

enum Source {
    Legit(ConstantFlow),
    Attack(AttackFlow),
}

impl Source {
    fn next(&mut self) -> Option<Packet> {
        match self {
            Source::Legit(f) => f.next(),
            Source::Attack(f) => f.next(),
        }
    }
}

// (time, legit after attack on ties, flow, source)
type Key = Reverse<(Nanos, u8, u64, usize)>;

fn push(heap: &mut BinaryHeap<Key>, sources: &mut [Source], i: usize) {
    if let Some(p) = sources[i].next() {
        heap.push(Reverse((p.arrival, !is_attack(p.flow) as u8, p.flow.0, i)));
    }
}

/// Runs `det` against background plus attack traffic up to the horizon.
pub fn simulate<D: Detector + ?Sized>(det: &mut D, cfg: &SimConfig, rng: &mut impl Rng) -> Result<SimOutcome> {
    cfg.validate()?;
    let bg = &cfg.background;
    let n = bg.flow_count(cfg.rho, cfg.attack_load())?;
    let mut sources: Vec<Source> = Vec::with_capacity(n as usize + cfg.attacks.len());
    for (i, a) in cfg.attacks.iter().enumerate() {
        let phase = if cfg.attack_phase { rng.random_range(0..a.t_b) } else { 0 };
        sources.push(Source::Attack(AttackFlow::new(attack_id(i as u64), *a, phase, cfg.horizon)));
    }
    for i in 0..n {
        sources.push(Source::Legit(ConstantFlow::with_random_phase(
            FlowId(i),
            bg.packet_size,
            bg.rate,
            0,
            cfg.horizon,
            rng,
        )));
    }
    let mut next_legit = n;
    let mut heap = BinaryHeap::with_capacity(sources.len());
    for i in 0..sources.len() {
        push(&mut heap, &mut sources, i);
    }
    let mut scorer = Scorer::new();
    let mut trace = cfg.record.then(Vec::new);
    while let Some(Reverse((at, _, flow, i))) = heap.pop() {
        let src = &sources[i];
        let size = match src {
            Source::Legit(_) => bg.packet_size,
            Source::Attack(_) => cfg.attacks[i].packet_size,
        };
        let pkt = Packet { flow: FlowId(flow), size, arrival: at };
        if let Some(t) = trace.as_mut() {
            t.push(pkt);
        }
        let hit = scorer.offer(det, &pkt)?;
        push(&mut heap, &mut sources, i);
        if hit.is_some() && bg.replacement {
            sources.push(Source::Legit(ConstantFlow::with_random_phase(
                FlowId(next_legit),
                bg.packet_size,
                bg.rate,
                at,
                cfg.horizon,
                rng,
            )));
            next_legit += 1;
            let last = sources.len() - 1;
            push(&mut heap, &mut sources, last);
        }
    }
    let report = scorer.report(&cfg.spec, bg.rate, cfg.horizon);
    Ok(SimOutcome { report, flows: scorer.flows, trace })
}

/// Scores a prepared stream, e.g. a trace read from disk.
pub fn replay<D: Detector + ?Sized>(
    det: &mut D,
    stream: impl IntoIterator<Item = Result<Packet>>,
    spec: &FlowSpec,
    legit_rate: Rate,
    horizon: Nanos,
) -> Result<(DamageReport, FxHashMap<FlowId, FlowRecord>)> {
    let mut scorer = Scorer::new();
    let mut last = 0;
    for p in stream {
        let p = p?;
        if p.arrival < last {
            return Err(Error::StreamOrder { prev: last, got: p.arrival });
        }
        last = p.arrival;
        if p.arrival >= horizon {
            break;
        }
        scorer.offer(det, &p)?;
    }
    Ok((scorer.report(spec, legit_rate, horizon), scorer.flows))
}
