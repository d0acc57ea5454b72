//! Several RLFDs side by side, each owning the flows that hash to it.

use crate::detector::{Detector, Footprint};
use crate::error::{config, Result};
use crate::hash::{derive_seed, KeyedHash};
use crate::model::{Detection, FlowId, Nanos, Packet};

use super::{Rlfd, RlfdConfig};

#[derive(Clone, Debug)]
pub struct ShardedRlfd {
    shards: Vec<Rlfd>,
    key: KeyedHash,
}

impl ShardedRlfd {
    /// `r` shards sharing `cfg`; shard 0 keeps `cfg.seed`, so `r = 1` behaves
    /// exactly like a lone `Rlfd`.
    pub fn new(cfg: RlfdConfig, r: usize) -> Result<Self> {
        if r == 0 {
            return config("rlfd shard count must be at least 1");
        }
        let shards = (0..r)
            .map(|i| {
                let mut c = cfg.clone();
                if i > 0 {
                    c.seed = derive_seed(cfg.seed, &[i as u64]);
                }
                Rlfd::new(c)
            })
            .collect::<Result<Vec<_>>>()?;
        let key = KeyedHash::new(derive_seed(cfg.seed, &[u64::MAX]), derive_seed(cfg.seed, &[u64::MAX, 1]));
        Ok(ShardedRlfd { shards, key })
    }

    pub fn shard_of(&self, flow: FlowId) -> usize {
        if self.shards.len() == 1 {
            return 0;
        }
        ((self.key.hash(flow.0) as u128 * self.shards.len() as u128) >> 64) as usize
    }

    pub fn shards(&self) -> &[Rlfd] {
        &self.shards
    }
}

impl Detector for ShardedRlfd {
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        let i = self.shard_of(pkt.flow);
        self.shards[i].process(pkt)
    }

    fn advance(&mut self, now: Nanos) -> Result<()> {
        self.shards.iter_mut().try_for_each(|s| s.advance(now))
    }

    fn footprint(&self) -> Footprint {
        self.shards.iter().map(|s| s.footprint()).fold(Footprint::default(), |a, b| a + b)
    }

    fn name(&self) -> &'static str {
        self.shards[0].name()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FlowSpec;

    #[test]
    fn shard_loads_are_balanced() {
        let spec = FlowSpec::per_second(12_500, 3028).unwrap();
        let s = ShardedRlfd::new(RlfdConfig::new(16, 2, 1000, spec, 11).unwrap(), 4).unwrap();
        let mut load = [0i64; 4];
        let n = 100_000i64;
        for f in 0..n as u64 {
            load[s.shard_of(FlowId(f))] += 1;
        }
        // binomial sd = sqrt(n·1/4·3/4)
        let sd = ((n as f64) * 0.25 * 0.75).sqrt();
        for l in load {
            assert!(((l - n / 4) as f64).abs() < 5.0 * sd, "{load:?}");
        }
    }
}
