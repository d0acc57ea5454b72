//! Experiment configuration, read from TOML. Every field has a default; a bare
//! file reproduces the evaluation link (1 Gb/s, γ = 12.5 KB/s, β = 3028 B).

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::model::{secs_to_ns, FlowSpec, Nanos, Rate, DEFAULT_MAX_PACKET};
use crate::sim::{AttackPattern, BackgroundConfig, DEFAULT_LEGIT_PACKET};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    /// Link capacity ρ, bytes/s.
    pub rho: f64,
    /// γ, bytes/s.
    pub gamma: f64,
    /// β, bytes.
    pub beta: u64,
    pub max_packet: u32,
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection { rho: 125_000_000.0, gamma: 12_500.0, beta: 3028, max_packet: DEFAULT_MAX_PACKET }
    }
}

impl LinkSection {
    pub fn spec(&self) -> Result<FlowSpec> {
        if self.beta == 0 {
            return config("link.beta must be positive");
        }
        FlowSpec::new(rate("link.gamma", self.gamma)?, self.beta)
    }

    pub fn rho(&self) -> Result<Rate> {
        let r = rate("link.rho", self.rho)?;
        if self.rho < self.gamma {
            return config(format!("link.rho = {} must be at least link.gamma = {}", self.rho, self.gamma));
        }
        Ok(r)
    }

    pub fn n_gamma(&self) -> u64 {
        (self.rho / self.gamma + 1e-9).floor() as u64
    }
}

fn rate(field: &str, v: f64) -> Result<Rate> {
    if !(v > 0.0) || !v.is_finite() {
        return config(format!("{field} = {v} must be a positive rate"));
    }
    Rate::from_f64(v).map_err(|_| crate::Error::Config(format!("{field} = {v} is not representable")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    pub legit_packet: u32,
    /// Per-flow legitimate rate in multiples of γ.
    pub legit_rate_gamma: f64,
    /// Background flow count; omitted fills the link.
    pub legit_flows: Option<u64>,
    pub replacement: bool,
    pub attack_flows: u32,
    pub attack_packet: u32,
    pub attack_phase: bool,
}

impl Default for TrafficSection {
    fn default() -> Self {
        TrafficSection {
            legit_packet: DEFAULT_LEGIT_PACKET,
            legit_rate_gamma: 1.0,
            legit_flows: None,
            replacement: true,
            attack_flows: 10,
            attack_packet: DEFAULT_MAX_PACKET,
            attack_phase: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Clef,
    Eardet,
    Rlfd,
    TwinRlfd,
    Amf,
    Fm,
    AmfFm,
}

impl DetectorKind {
    pub fn label(&self) -> &'static str {
        match self {
            DetectorKind::Clef => "clef",
            DetectorKind::Eardet => "eardet",
            DetectorKind::Rlfd => "rlfd",
            DetectorKind::TwinRlfd => "twin-rlfd",
            DetectorKind::Amf => "amf",
            DetectorKind::Fm => "fm",
            DetectorKind::AmfFm => "amf-fm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub kinds: Vec<DetectorKind>,
    /// Total counters per scheme.
    pub m: usize,
    /// Expected concurrent flows for the RLFD depth rule; omitted uses n_γ.
    pub n: Option<u64>,
    pub depth: Option<u32>,
    /// Use the bundled settings table for RLFD depth and the second cycle.
    pub preset: bool,
    pub alpha_target: f64,
    pub jitter: f64,
    pub hashed_ids: bool,
    pub amf_stages: usize,
    pub conservative: bool,
    /// EARDet counter threshold override, bytes.
    pub beta_th: Option<u64>,
}

impl Default for DetectorSection {
    fn default() -> Self {
        DetectorSection {
            kinds: vec![DetectorKind::Clef],
            m: 200,
            n: None,
            depth: None,
            preset: false,
            alpha_target: crate::hybrid::DEFAULT_ALPHA_TARGET,
            jitter: crate::hybrid::DEFAULT_JITTER,
            hashed_ids: false,
            amf_stages: crate::baseline::amf::DEFAULT_STAGES,
            conservative: false,
            beta_th: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Average attack rates R_atk in multiples of γ.
    pub rates_gamma: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Burst periods T_b in seconds.
    pub t_b_seconds: Vec<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { rates_gamma: vec![10.0, 50.0, 100.0, 300.0], thetas: vec![1.0], t_b_seconds: vec![0.967] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub horizon_seconds: f64,
    pub repeats: u32,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { horizon_seconds: 200.0, repeats: 50, seed: 1, workers: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    /// Counters per RLFD.
    pub m: Vec<u64>,
    /// Total flows n; omitted uses n_γ.
    pub n: Option<u64>,
    pub alphas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub t_b_seconds: Vec<f64>,
    pub d: u32,
    pub t_c1: f64,
    pub t_c2: f64,
    /// γ_h, bytes/s; omitted uses ρ/(m+1) with the per-RLFD m doubled.
    pub gamma_h: Option<f64>,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection {
            m: vec![50],
            n: None,
            alphas: vec![30.0, 100.0, 200.0],
            thetas: vec![0.25, 1.0],
            t_b_seconds: vec![0.5, 10.0],
            d: 4,
            t_c1: 0.1,
            t_c2: 7.92,
            gamma_h: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub m: Vec<u64>,
    pub n: Vec<u64>,
    /// Attack sizes α; empty uses {α_0.5/2, α_0.5, α_1.0, 2α_1.0} per cell.
    pub alphas: Vec<f64>,
    /// Legitimate-rate divisors k: n·k flows at γ/k.
    pub profiles: Vec<u64>,
    pub trials: u64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection { m: vec![32, 100], n: vec![1000, 10_000], alphas: vec![], profiles: vec![1], trials: 2000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub link: LinkSection,
    pub traffic: TrafficSection,
    pub detector: DetectorSection,
    pub grid: GridSection,
    pub run: RunSection,
    pub bounds: BoundsSection,
    pub oracle: OracleSection,
}

/// One attack configuration of the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub index: u64,
    /// Position in the attack grid alone; runs of different detectors on the
    /// same attack share traffic seeds.
    pub traffic: u64,
    pub detector: DetectorKind,
    pub rate: f64,
    pub theta: f64,
    pub t_b: Nanos,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| crate::Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn horizon(&self) -> Nanos {
        secs_to_ns(self.run.horizon_seconds)
    }

    /// Checks everything a simulation sweep needs.
    pub fn validate(&self) -> Result<()> {
        self.link.spec()?;
        let rho = self.link.rho()?;
        if !(self.run.horizon_seconds > 0.0) {
            return config(format!("run.horizon_seconds = {} must be positive", self.run.horizon_seconds));
        }
        if self.run.repeats == 0 {
            return config("run.repeats must be at least 1");
        }
        if self.detector.kinds.is_empty() {
            return config("detector.kinds is empty");
        }
        let g = &self.grid;
        if g.rates_gamma.is_empty() || g.thetas.is_empty() || g.t_b_seconds.is_empty() {
            return config("attack grid is empty: grid.rates_gamma, grid.thetas and grid.t_b_seconds need values");
        }
        if self.traffic.legit_packet == 0 || self.traffic.legit_packet > self.link.max_packet {
            return config(format!("traffic.legit_packet must lie in 1..={}", self.link.max_packet));
        }
        if self.traffic.attack_packet == 0 || self.traffic.attack_packet > self.link.max_packet {
            return config(format!("traffic.attack_packet must lie in 1..={}", self.link.max_packet));
        }
        for cell in self.cells() {
            self.attack_pattern(&cell)?.validate(rho)?;
        }
        self.background()?.flow_count(rho, 0.0)?;
        for &k in &self.detector.kinds {
            super::build_detector(self, k, 0)?;
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut v = Vec::new();
        for &detector in &self.detector.kinds {
            let mut traffic = 0;
            for &theta in &self.grid.thetas {
                for &t_b in &self.grid.t_b_seconds {
                    for &r in &self.grid.rates_gamma {
                        let index = v.len() as u64;
                        let t_b = secs_to_ns(t_b);
                        v.push(Cell { index, traffic, detector, rate: r * self.link.gamma, theta, t_b });
                        traffic += 1;
                    }
                }
            }
        }
        v
    }

    pub fn attack_pattern(&self, c: &Cell) -> Result<AttackPattern> {
        let mut p = AttackPattern::new(rate("grid.rates_gamma", c.rate)?, c.theta, c.t_b)?;
        p.packet_size = self.traffic.attack_packet;
        Ok(p)
    }

    pub fn background(&self) -> Result<BackgroundConfig> {
        let t = &self.traffic;
        Ok(BackgroundConfig {
            n: t.legit_flows,
            rate: rate("traffic.legit_rate_gamma", t.legit_rate_gamma * self.link.gamma)?,
            packet_size: t.legit_packet,
            replacement: t.replacement,
        })
    }

    /// Expected concurrent flows for the depth rule.
    pub fn expected_flows(&self) -> u64 {
        self.detector.n.unwrap_or_else(|| self.link.n_gamma())
    }
}
