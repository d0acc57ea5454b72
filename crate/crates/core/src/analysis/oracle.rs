//! Balls-into-bins estimate of one RLFD level's chance to pick the attack counter.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::hash::{derive_seed, rng_from_seed};

/// `n·k` legitimate flows at γ/k each: the same aggregate load as `n` flows at γ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LegitProfile {
    pub k: u64,
}

impl LegitProfile {
    pub const FULL_RATE: LegitProfile = LegitProfile { k: 1 };

    pub fn label(&self) -> String {
        if self.k == 1 {
            "gamma".into()
        } else {
            format!("gamma/{}", self.k)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

const CHUNK: u64 = 250;

/// Counts of `balls` thrown uniformly into `bins`, via sequential binomials.
pub fn multinomial_uniform(balls: u64, bins: usize, rng: &mut impl Rng, out: &mut Vec<u64>) {
    out.clear();
    let mut left = balls;
    for i in 0..bins {
        let rest = (bins - i) as f64;
        let c = if i + 1 == bins || left == 0 {
            left
        } else {
            Binomial::new(left, 1.0 / rest).expect("valid binomial").sample(rng)
        };
        out.push(c);
        left -= c;
    }
}

/// One trial: legit flows of weight 1/k spread over m counters, the attack
/// (weight α) in counter 0, which is exchangeable with the others. Succeeds iff
/// the attack counter is strictly the largest.
pub fn single_level_trial(m: usize, n: u64, alpha: f64, p: LegitProfile, rng: &mut impl Rng, buf: &mut Vec<u64>) -> bool {
    multinomial_uniform(n * p.k, m, rng, buf);
    // compare in units of γ/k so counts stay integers
    let attack = buf[0] as f64 + alpha * p.k as f64;
    buf[1..].iter().all(|&c| attack > c as f64)
}

/// Success fraction over `trials`, run in parallel over seed-derived streams.
pub fn monte_carlo_single_level(m: usize, n: u64, alpha: f64, p: LegitProfile, trials: u64, seed: u64) -> Estimate {
    let chunks = trials.div_ceil(CHUNK);
    let wins: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_from_seed(derive_seed(seed, &[c]));
            let mut buf = Vec::with_capacity(m);
            let todo = CHUNK.min(trials - c * CHUNK);
            (0..todo).filter(|_| single_level_trial(m, n, alpha, p, &mut rng, &mut buf)).count() as u64
        })
        .sum();
    let mean = wins as f64 / trials as f64;
    Estimate { mean, stderr: (mean * (1.0 - mean) / trials as f64).sqrt(), trials }
}
