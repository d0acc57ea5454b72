//! Packet generators for legitimate and attack flows.
//!
//! Generators are lazy iterators so long runs never hold a whole stream.

use rand::Rng;

use crate::error::{config, Result};
use crate::model::{FlowId, Nanos, Packet, Rate, DEFAULT_MAX_PACKET, NS_PER_SEC};

/// Attack flow IDs carry this bit; legitimate IDs never do.
pub const ATTACK_BIT: u64 = 1 << 63;

pub fn attack_id(i: u64) -> FlowId {
    FlowId(ATTACK_BIT | i)
}

pub fn is_attack(f: FlowId) -> bool {
    f.0 & ATTACK_BIT != 0
}

/// Default legitimate packet size in bytes.
pub const DEFAULT_LEGIT_PACKET: u32 = 1000;

/// Fixed-size packets at constant spacing: packet k at start + phase + ⌈k·size/rate⌉.
#[derive(Clone, Debug)]
pub struct ConstantFlow {
    flow: FlowId,
    size: u32,
    rate: Rate,
    origin: Nanos,
    end: Nanos,
    k: u64,
}

impl ConstantFlow {
    pub fn new(flow: FlowId, size: u32, rate: Rate, origin: Nanos, end: Nanos) -> Self {
        ConstantFlow { flow, size, rate, origin, end, k: 0 }
    }

    /// Random phase in [0, size/rate).
    pub fn with_random_phase(flow: FlowId, size: u32, rate: Rate, start: Nanos, end: Nanos, rng: &mut impl Rng) -> Self {
        let gap = rate.ns_for(size as u128).max(1) as u64;
        Self::new(flow, size, rate, start + rng.random_range(0..gap), end)
    }

    pub fn gap(&self) -> Nanos {
        self.rate.ns_for(self.size as u128) as Nanos
    }
}

impl Iterator for ConstantFlow {
    type Item = Packet;
    fn next(&mut self) -> Option<Packet> {
        let off = self.rate.ns_for(self.k as u128 * self.size as u128);
        let t = self.origin as u128 + off;
        if t >= self.end as u128 {
            return None;
        }
        self.k += 1;
        Some(Packet { flow: self.flow, size: self.size, arrival: t as Nanos })
    }
}

/// On-off attack: bursts of length θ·T_b at rate R/θ every T_b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackPattern {
    /// Average rate R_atk.
    pub rate: Rate,
    pub theta: f64,
    pub t_b: Nanos,
    pub start: Nanos,
    pub packet_size: u32,
}

impl AttackPattern {
    pub fn new(rate: Rate, theta: f64, t_b: Nanos) -> Result<Self> {
        let p = AttackPattern { rate, theta, t_b, start: 0, packet_size: DEFAULT_MAX_PACKET };
        if !(theta > 0.0 && theta <= 1.0) {
            return config(format!("attack duty cycle {theta} must lie in (0, 1]"));
        }
        if t_b == 0 {
            return config("attack burst period must be positive");
        }
        Ok(p)
    }

    pub fn flat(rate: Rate) -> Self {
        AttackPattern { rate, theta: 1.0, t_b: NS_PER_SEC, start: 0, packet_size: DEFAULT_MAX_PACKET }
    }

    /// R_atk/θ, the instantaneous rate during a burst.
    pub fn burst_rate(&self) -> f64 {
        self.rate.as_f64() / self.theta
    }

    pub fn validate(&self, rho: Rate) -> Result<()> {
        if self.burst_rate() > rho.as_f64() * (1.0 + 1e-12) {
            return config(format!(
                "attack burst rate R/theta = {:.1} B/s exceeds link capacity {rho}",
                self.burst_rate()
            ));
        }
        if self.packet_size == 0 {
            return config("attack packet size must be positive");
        }
        Ok(())
    }

    /// Fluid bytes sent in [0, t) relative to the pattern origin.
    pub fn fluid_bytes(&self, t: Nanos) -> f64 {
        let tb = self.t_b as f64;
        let on = self.theta * tb;
        let q = (t as f64 / tb).floor();
        let r = t as f64 - q * tb;
        (q * on + r.min(on)) * self.burst_rate() / 1e9
    }

    /// Earliest offset at which the fluid curve reaches `bytes`.
    pub fn time_for(&self, bytes: f64) -> f64 {
        let tb = self.t_b as f64;
        let per_period = self.rate.as_f64() * tb / 1e9;
        let q = (bytes / per_period).floor();
        let rem = bytes - q * per_period;
        q * tb + rem / self.burst_rate() * 1e9
    }
}

/// Packets of an attack flow: packet k leaves when the fluid curve reaches k·size.
#[derive(Clone, Debug)]
pub struct AttackFlow {
    flow: FlowId,
    pattern: AttackPattern,
    origin: Nanos,
    end: Nanos,
    k: u64,
}

impl AttackFlow {
    pub fn new(flow: FlowId, pattern: AttackPattern, phase: Nanos, end: Nanos) -> Self {
        AttackFlow { flow, origin: pattern.start + phase, pattern, end, k: 0 }
    }
}

impl Iterator for AttackFlow {
    type Item = Packet;
    fn next(&mut self) -> Option<Packet> {
        let off = self.pattern.time_for(self.k as f64 * self.pattern.packet_size as f64).ceil();
        let t = self.origin as f64 + off;
        if t >= self.end as f64 {
            return None;
        }
        self.k += 1;
        Some(Packet { flow: self.flow, size: self.pattern.packet_size, arrival: t as Nanos })
    }
}

/// Legitimate background: `n` flows at `rate` each.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackgroundConfig {
    /// None fills the capacity left by attack flows: ⌊(ρ − ΣR_atk)/rate⌋.
    pub n: Option<u64>,
    pub rate: Rate,
    pub packet_size: u32,
    /// Start a fresh flow whenever a flow is blacklisted.
    pub replacement: bool,
}

impl BackgroundConfig {
    pub fn full_use(rate: Rate) -> Self {
        BackgroundConfig { n: None, rate, packet_size: DEFAULT_LEGIT_PACKET, replacement: true }
    }

    pub fn flow_count(&self, rho: Rate, attack_load: f64) -> Result<u64> {
        let n = match self.n {
            Some(n) => n,
            None => ((rho.as_f64() - attack_load).max(0.0) / self.rate.as_f64() + 1e-9).floor() as u64,
        };
        if n as f64 * self.rate.as_f64() > rho.as_f64() * (1.0 + 1e-12) {
            return config(format!("background load {n} x {} exceeds link capacity {rho}", self.rate));
        }
        Ok(n)
    }
}

/// All packets of `n` background flows up to `end`, sorted by time.
pub fn gen_background(cfg: &BackgroundConfig, rho: Rate, end: Nanos, rng: &mut impl Rng) -> Result<Vec<Packet>> {
    let n = cfg.flow_count(rho, 0.0)?;
    let mut v: Vec<Packet> = (0..n)
        .flat_map(|i| ConstantFlow::with_random_phase(FlowId(i), cfg.packet_size, cfg.rate, 0, end, rng).collect::<Vec<_>>())
        .collect();
    v.sort_by_key(|p| (p.arrival, p.flow));
    Ok(v)
}

/// All packets of one attack flow up to `end`.
pub fn gen_attack(pattern: &AttackPattern, flow: FlowId, end: Nanos) -> Vec<Packet> {
    AttackFlow::new(flow, *pattern, 0, end).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::rng_from_seed;
    use crate::model::{FlowSpec, LeakyBucket};

    #[test]
    fn constant_flow_spacing() {
        let g = Rate::per_second(12_500).unwrap();
        let f = ConstantFlow::new(FlowId(0), 1000, g, 0, NS_PER_SEC);
        assert_eq!(f.gap(), 80_000_000);
        let t: Vec<_> = f.map(|p| p.arrival).collect();
        assert_eq!(t.len(), 13);
        assert_eq!(t[1], 80_000_000);
    }

    #[test]
    fn background_fills_link_exactly() {
        let g = Rate::per_second(12_500).unwrap();
        let rho = Rate::per_second(125_000_000).unwrap();
        let cfg = BackgroundConfig::full_use(g);
        assert_eq!(cfg.flow_count(rho, 0.0).unwrap(), 10_000);
        assert_eq!(cfg.flow_count(rho, 12_500.0 * 10.0).unwrap(), 9990);
        let over = BackgroundConfig { n: Some(10_001), ..cfg };
        assert!(over.flow_count(rho, 0.0).is_err());
    }

    #[test]
    fn background_flows_are_compliant() {
        let spec = FlowSpec::per_second(12_500, 3028).unwrap();
        let rho = Rate::per_second(1_250_000).unwrap();
        let mut rng = rng_from_seed(3);
        let pkts = gen_background(&BackgroundConfig::full_use(spec.gamma), rho, 20 * NS_PER_SEC, &mut rng).unwrap();
        let mut buckets = vec![LeakyBucket::new(spec); 100];
        for p in &pkts {
            assert!(!buckets[p.flow.0 as usize].update_packet(p).unwrap());
        }
        assert!(pkts.windows(2).all(|w| w[0].arrival <= w[1].arrival));
    }

    #[test]
    fn burst_shape() {
        let g = 12_500u64;
        let p = AttackPattern::new(Rate::per_second(10 * g).unwrap(), 0.25, 967_000_000).unwrap();
        assert!((p.burst_rate() - 40.0 * g as f64).abs() < 1e-6);
        let pkts = gen_attack(&p, attack_id(0), 10 * p.t_b);
        // silent in the off phase
        assert!(pkts.iter().all(|q| (q.arrival % p.t_b) as f64 <= 0.25 * p.t_b as f64 + 1.0));
        let bytes: u64 = pkts.iter().map(|q| q.size as u64).sum();
        let want = 10.0 * p.t_b as f64 / 1e9 * 10.0 * g as f64;
        assert!((bytes as f64 - want).abs() <= 1514.0, "{bytes} vs {want}");
    }

    #[test]
    fn flat_attack_is_constant_rate() {
        let p = AttackPattern::flat(Rate::per_second(1514 * 100).unwrap());
        let t: Vec<_> = gen_attack(&p, attack_id(1), NS_PER_SEC).iter().map(|q| q.arrival).collect();
        assert_eq!(t.len(), 100);
        assert!(t.windows(2).all(|w| w[1] - w[0] == 10_000_000));
    }

    #[test]
    fn burst_rate_above_link_is_rejected() {
        let p = AttackPattern::new(Rate::per_second(1000).unwrap(), 0.01, NS_PER_SEC).unwrap();
        assert!(p.validate(Rate::per_second(50_000).unwrap()).is_err());
        assert!(p.validate(Rate::per_second(100_000).unwrap()).is_ok());
    }

    #[test]
    fn ids_partition() {
        assert!(is_attack(attack_id(3)));
        assert!(!is_attack(FlowId(3)));
    }
}
