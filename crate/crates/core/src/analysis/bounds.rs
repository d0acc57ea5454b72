//! Closed-form detection-probability, damage and minimum-rate bounds.
//!
//! Logarithms are natural throughout.

use crate::error::{Error, Result};

/// Poisson CDF Q(K, λ) = Σ_{k=0..K} e^{−λ}λ^k/k!, summed in log space.
pub fn poisson_cdf(k: i64, lambda: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    assert!(lambda > 0.0, "poisson rate must be positive, got {lambda}");
    let ln_l = lambda.ln();
    let mut log_term = -lambda;
    let mut logs = Vec::with_capacity(k as usize + 1);
    logs.push(log_term);
    for i in 1..=k {
        log_term += ln_l - (i as f64).ln();
        logs.push(log_term);
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|&l| (l - max).exp()).sum();
    (max + s.ln()).exp().clamp(0.0, 1.0)
}

/// K = ⌊λ + sqrt(2λ ln n) − α⌋ with λ = n/m.
pub fn k_threshold(m: f64, n: f64, alpha: f64) -> i64 {
    let lambda = n / m;
    (lambda + (2.0 * lambda * n.ln()).sqrt() - alpha).floor() as i64
}

/// Lower bound on the chance that a flat flow at αγ wins one level: 1 − Q(K, n/m).
pub fn single_level_bound(m: u64, n: u64, alpha: f64) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (1.0 - poisson_cdf(k_threshold(m, n, alpha), n / m)).clamp(0.0, 1.0)
}

/// α_0.5 = sqrt(2(n/m) ln n).
pub fn alpha_half(m: u64, n: u64) -> f64 {
    (2.0 * (n as f64 / m as f64) * (n as f64).ln()).sqrt()
}

/// α_1.0 = 2·α_0.5.
pub fn alpha_one(m: u64, n: u64) -> f64 {
    2.0 * alpha_half(m, n)
}

/// ⌊log_m(n/n_γ)⌋ + 1, for n ≥ n_γ, by integer comparison.
pub fn level_exponent(m: u64, n: u64, n_gamma: u64) -> u32 {
    let mut e = 1;
    let mut p = m as u128;
    while p * n_gamma as u128 <= n as u128 {
        e += 1;
        p *= m as u128;
    }
    e
}

/// Lower bound on full-cycle detection of a flat flow at αγ by one RLFD.
pub fn total_detection_bound(m: u64, n: u64, n_gamma: u64, alpha: f64) -> f64 {
    if n < n_gamma {
        return single_level_bound(m, n, alpha);
    }
    single_level_bound(m, n_gamma, alpha).powi(level_exponent(m, n, n_gamma) as i32)
}

/// Parameters of the Twin-RLFD damage bound. Rates in bytes/s, times in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwinInputs {
    /// Counters per RLFD.
    pub m: u64,
    pub n: u64,
    pub n_gamma: u64,
    pub alpha: f64,
    pub theta: f64,
    pub t_b: f64,
    pub d: u32,
    pub t_c1: f64,
    pub t_c2: f64,
    pub gamma: f64,
    pub gamma_h: f64,
}

/// Which burst-length regime the bound was evaluated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BurstCase {
    /// θT_b ≥ 2T_c^(1).
    Long,
    /// θT_b < 2T_c^(1).
    Short,
}

impl TwinInputs {
    pub fn case(&self) -> BurstCase {
        if self.theta * self.t_b >= 2.0 * self.t_c1 {
            BurstCase::Long
        } else {
            BurstCase::Short
        }
    }
}

/// Upper bound on expected overuse damage (bytes) of a flow under Twin-RLFD.
/// Returns +∞ when the detection lower bound is 0.
pub fn twin_damage_bound(x: &TwinInputs) -> Result<f64> {
    let positive = [x.alpha, x.theta, x.t_b, x.t_c1, x.t_c2, x.gamma, x.gamma_h];
    if positive.iter().any(|v| !(*v > 0.0)) || x.m < 2 || x.n == 0 || x.n_gamma == 0 || x.d == 0 {
        return Err(Error::Domain(format!("all inputs must be positive: {x:?}")));
    }
    if x.theta > 1.0 {
        return Err(Error::Domain(format!("theta = {} > 1", x.theta)));
    }
    if x.alpha * x.gamma >= x.theta * x.gamma_h {
        return Err(Error::Domain(format!(
            "R_atk < theta*gamma_h fails: {} >= {}",
            x.alpha * x.gamma,
            x.theta * x.gamma_h
        )));
    }
    if x.case() == BurstCase::Short && x.t_b >= x.t_c2 / x.d as f64 {
        return Err(Error::Domain(format!(
            "T_b < T_c2/d fails: {} s >= {} s, so bursts are not flat to the second RLFD",
            x.t_b,
            x.t_c2 / x.d as f64
        )));
    }
    let (alpha_theta, scale) = match x.case() {
        BurstCase::Long => (x.alpha / x.theta, x.gamma * x.alpha),
        BurstCase::Short => (x.alpha, 2.0 * x.d as f64 * x.gamma_h),
    };
    let pr = total_detection_bound(x.m, x.n, x.n_gamma, alpha_theta);
    if pr <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(x.t_c1 * scale / (x.theta * pr))
}

/// Rate (bytes/s) above which Flow Memory catches flat flows: (β/S_pkt)(R/m).
pub fn fm_min_rate(beta: f64, s_pkt: f64, r: f64, m: f64) -> f64 {
    beta / s_pkt * r / m
}

/// Expected time a tracked flow survives in Flow Memory: m·T_pkt.
pub fn fm_expected_track_time(m: u64, t_pkt: f64) -> f64 {
    m as f64 * t_pkt
}

/// Chance that a flow shares no bucket in at least one AMF stage:
/// 1 − (1 − (1 − 1/m')^{n−1})^{d_s}.
pub fn amf_collision_free_prob(m: u64, stages: u32, n: u64) -> f64 {
    let w = (m / stages as u64) as f64;
    let alone = (1.0 - 1.0 / w).powf(n.saturating_sub(1) as f64);
    1.0 - (1.0 - alone).powi(stages as i32)
}

/// Same, with (1 − 1/m')^{n−1} ≈ e^{−(n−1)/m'}.
pub fn amf_collision_free_prob_approx(m: u64, stages: u32, n: u64) -> f64 {
    let w = (m / stages as u64) as f64;
    let alone = (-(n.saturating_sub(1) as f64) / w).exp();
    1.0 - (1.0 - alone).powi(stages as i32)
}

/// Chance that a bottom-level counter holds one flow: ((m−1)/m)^{n_d−1}.
pub fn rlfd_bottom_collision_free(m: u64, n_d: u64) -> f64 {
    ((m as f64 - 1.0) / m as f64).powf(n_d.saturating_sub(1) as f64)
}

pub fn rlfd_bottom_collision_free_approx(m: u64, n_d: u64) -> f64 {
    (-(n_d.saturating_sub(1) as f64) / m as f64).exp()
}

/// Load factor a 3-hash cuckoo table sustains; the bottom table gives every
/// flow its own slot up to about this fraction of m.
pub const CUCKOO_LOAD_FACTOR: f64 = 0.91;

/// Minimum guaranteed-detection rates in bytes/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RMin {
    pub clef: f64,
    pub eardet: f64,
    pub fm: f64,
    pub amf_fm: f64,
}

pub fn r_min_curves(m: u64, n_gamma: u64, theta: f64, rho: f64) -> RMin {
    let (mf, ng) = (m as f64, n_gamma as f64);
    RMin {
        clef: 4.0 * theta * (mf * ng.ln() / ng).sqrt() * rho / mf,
        eardet: theta * rho / (mf + 1.0),
        fm: theta * rho / mf,
        amf_fm: theta * rho / mf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_cdf(k: i64, l: f64) -> f64 {
        let mut term = (-l).exp();
        let mut s = term;
        for i in 1..=k {
            term *= l / i as f64;
            s += term;
        }
        s
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(poisson_cdf(-1, 5.0), 0.0);
        assert!((poisson_cdf(10, 10.0) - 0.583_039_750_192_2).abs() < 1e-10);
        assert!((poisson_cdf(10_000, 10.0) - 1.0).abs() < 1e-12);
        let big = poisson_cdf(2000, 2000.0);
        assert!(big.is_finite() && (0.5..0.52).contains(&big));
    }

    #[test]
    fn cdf_matches_direct_sum() {
        for l in [0.5, 3.0, 17.0, 49.5] {
            for k in [0, 1, 5, 20, 60, 120] {
                assert!((poisson_cdf(k, l) - direct_cdf(k, l)).abs() < 1e-10, "k={k} l={l}");
            }
        }
    }

    #[test]
    fn alpha_reference_values() {
        assert_eq!(alpha_half(100, 100_000).round(), 152.0);
        assert_eq!(alpha_one(100, 100_000).round(), 303.0);
        assert!(single_level_bound(100, 100_000, 303.0) >= 0.99);
        let h = alpha_half(100, 100_000);
        assert!((single_level_bound(100, 100_000, h) - 0.5).abs() < 0.05);
        assert_eq!(single_level_bound(100, 100_000, 1e6), 1.0);
    }

    #[test]
    fn level_exponents() {
        assert_eq!(level_exponent(100, 1000, 1000), 1);
        assert_eq!(level_exponent(100, 100_000, 1000), 2);
        assert_eq!(level_exponent(100, 99_999, 1000), 1);
        assert_eq!(level_exponent(100, 10_000_000, 1000), 3);
        let s = single_level_bound(50, 10_000, 120.0);
        assert_eq!(total_detection_bound(50, 10_000, 10_000, 120.0), s);
        assert!((total_detection_bound(50, 500_000, 10_000, 120.0) - s * s).abs() < 1e-15);
        assert_eq!(total_detection_bound(50, 5000, 10_000, 120.0), single_level_bound(50, 5000, 120.0));
    }

    fn table2(alpha: f64, t_b: f64) -> TwinInputs {
        let gamma = 50_000.0;
        TwinInputs {
            m: 50,
            n: 100_000,
            n_gamma: 100_000,
            alpha,
            theta: 0.25,
            t_b,
            d: 4,
            t_c1: 0.1,
            t_c2: 7.92,
            gamma,
            gamma_h: 1e5 / 101.0 * gamma,
        }
    }

    #[test]
    fn twin_bound_cases_and_errors() {
        let long = table2(200.0, 10.0);
        assert_eq!(long.case(), BurstCase::Long);
        // α/θ = 800 puts K below zero, so Pr(A) = 1
        assert!((twin_damage_bound(&long).unwrap() - 0.1 * 50_000.0 * 200.0 / 0.25).abs() < 1e-6);
        let short = table2(200.0, 0.5);
        assert_eq!(short.case(), BurstCase::Short);
        assert!(twin_damage_bound(&short).unwrap() > 0.0);
        // θγ_h = 247.5γ
        let fast = table2(248.0, 10.0);
        match twin_damage_bound(&fast) {
            Err(Error::Domain(msg)) => assert!(msg.contains("theta*gamma_h")),
            other => panic!("{other:?}"),
        }
        assert!(twin_damage_bound(&TwinInputs { t_c2: 1.0, ..short }).is_err());
    }

    #[test]
    fn twin_bound_is_infinite_without_detection_chance() {
        // λ = 1000 with ln n ≈ 34.5: the tail beyond K is below f64 resolution
        let mut x = table2(1.0, 10.0);
        x.theta = 1.0;
        x.m = 1_000_000_000_000;
        x.n = 1_000_000_000_000_000;
        x.n_gamma = x.n;
        assert_eq!(total_detection_bound(x.m, x.n, x.n_gamma, 1.0), 0.0);
        assert_eq!(twin_damage_bound(&x).unwrap(), f64::INFINITY);
    }

    #[test]
    fn flat_flow_is_theta_one() {
        let mut x = table2(100.0, 10.0);
        x.theta = 1.0;
        let pr = total_detection_bound(50, 100_000, 100_000, 100.0);
        assert!((twin_damage_bound(&x).unwrap() - 0.1 * 50_000.0 * 100.0 / pr).abs() < 1e-6);
    }

    #[test]
    fn fm_formulas() {
        assert_eq!(fm_min_rate(1514.0, 1514.0, 1e6, 10.0), 1e5);
        assert_eq!(fm_min_rate(3028.0, 1514.0, 125e6, 100.0), 2.0 * 125e6 / 100.0);
        assert_eq!(fm_min_rate(3028.0, 1514.0, 125e6, 200.0) * 2.0, fm_min_rate(3028.0, 1514.0, 125e6, 100.0));
        assert!((fm_expected_track_time(100, 8e-6) - 8e-4).abs() < 1e-15);
        // geometric mean (1 − P_e)/P_e with P_e = 1/(m+1)
        let pe = 1.0 / 101.0;
        assert!((fm_expected_track_time(100, 1.0) - (1.0 - pe) / pe).abs() < 1e-9);
    }

    #[test]
    fn collision_probabilities() {
        assert_eq!(amf_collision_free_prob(40, 4, 1), 1.0);
        assert!(amf_collision_free_prob(40, 4, 1000) < 1e-40);
        assert!(amf_collision_free_prob(40, 4, 1_000_000) < 1e-300);
        assert!((amf_collision_free_prob_approx(4000, 4, 1000) - amf_collision_free_prob(4000, 4, 1000)).abs() < 0.01);
        assert_eq!(rlfd_bottom_collision_free(128, 1), 1.0);
        assert!((rlfd_bottom_collision_free(1000, 1000) - 0.368).abs() < 0.001);
        // (127/128)^24 = 0.82842; the exponential form gives 0.82903
        assert!((rlfd_bottom_collision_free(128, 25) - 0.828_419).abs() < 1e-6);
        assert!((rlfd_bottom_collision_free_approx(128, 25) - 0.829_029).abs() < 1e-6);
    }

    #[test]
    fn r_min_ordering_and_memory_sensitivity() {
        let rho = 125e6;
        let a = r_min_curves(100, 100_000, 1.0, rho);
        // 4·sqrt(100·ln 10^5/10^5)·101/100
        let ratio = 4.0 * (100.0 * 1e5f64.ln() / 1e5).sqrt() * 101.0 / 100.0;
        assert!((a.clef / a.eardet - ratio).abs() < 1e-12);
        assert!(ratio < 0.44);
        let z = r_min_curves(100, 100_000, 1e-12, rho);
        assert!(z.clef < 1e-3 && z.eardet < 1e-3 && z.fm < 1e-3);
        let (lo, hi) = (r_min_curves(50, 100_000, 1.0, rho), r_min_curves(400, 100_000, 1.0, rho));
        assert!(lo.clef / hi.clef <= 3.0);
        assert!((lo.eardet / hi.eardet - 401.0 / 51.0).abs() < 1e-9);
    }
}
