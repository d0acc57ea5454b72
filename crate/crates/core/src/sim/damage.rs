//! Damage accounting: overuse by large flows plus legitimate traffic blocked.

use serde::Serialize;

use crate::model::{FlowId, FlowSpec, Nanos, Rate};

/// Bytes by which a flow exceeded γt+β between its first packet and `cut`.
pub fn overuse(spec: &FlowSpec, bytes: u64, first: Nanos, cut: Nanos) -> u128 {
    (bytes as u128).saturating_sub(spec.th(cut.saturating_sub(first)))
}

/// Legitimate traffic blocked from detection until the horizon.
pub fn fp_damage(rate: Rate, detected: Nanos, horizon: Nanos) -> f64 {
    rate.as_f64() * horizon.saturating_sub(detected) as f64 / 1e9
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DamageReport {
    pub d_over: f64,
    pub d_fp: f64,
    /// Undetected attack flows over all attack flows; 0 when there are none.
    pub fn_ratio: f64,
    /// Legitimate flows detected.
    pub fp_count: u64,
    pub attack_flows: u64,
    pub detections: Vec<(FlowId, Nanos)>,
    pub packets: u64,
    pub delivered_bytes: u64,
    pub dropped_bytes: u64,
}

impl DamageReport {
    pub fn damage(&self) -> f64 {
        self.d_over + self.d_fp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NS_PER_SEC;

    fn spec() -> FlowSpec {
        FlowSpec::per_second(12_500, 3028).unwrap()
    }

    #[test]
    fn compliant_flow_has_no_overuse() {
        assert_eq!(overuse(&spec(), 12_500 * 100 + 3028, 0, 100 * NS_PER_SEC), 0);
    }

    #[test]
    fn undetected_double_rate_flow() {
        // 2γ for 100 s: 2γ·100 − (γ·100 + β)
        let bytes = 2 * 12_500 * 100;
        assert_eq!(overuse(&spec(), bytes, 0, 100 * NS_PER_SEC), 12_500 * 100 - 3028);
    }

    #[test]
    fn blocked_until_horizon() {
        let d = fp_damage(spec().gamma, 50 * NS_PER_SEC, 200 * NS_PER_SEC);
        assert_eq!(d, 150.0 * 12_500.0);
    }
}
