//! Property tests for the building blocks.

use proptest::prelude::*;
use statrs::distribution::{DiscreteCDF, Poisson};

use clef_core::analysis::{poisson_cdf, twin_damage_bound, BurstCase, TwinInputs};
use clef_core::eardet::{Eardet, EardetConfig};
use clef_core::hash::{rng_from_seed, KeyedHash};
use clef_core::rlfd::{CuckooTable, PathLayout};
use clef_core::sim::trace::{write_trace, TraceReader};
use clef_core::sim::{simulate, AttackPattern, BackgroundConfig, SimConfig};
use clef_core::{Blacklist, Detector, FlowId, FlowSpec, LeakyBucket, Nanos, Packet, Rate};

fn spec() -> FlowSpec {
    FlowSpec::per_second(12_500, 3028).unwrap()
}

/// (gap ns, size) pairs turned into a timestamped single-flow stream.
fn stream(steps: &[(u64, u32)]) -> Vec<Packet> {
    let mut t = 0;
    steps
        .iter()
        .map(|&(gap, size)| {
            t += gap;
            Packet::new(1, size, t)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The bucket reports a violation exactly when some window ending at the
    /// current packet carries more than th(window length) bytes.
    #[test]
    fn bucket_matches_window_oracle(steps in prop::collection::vec((0u64..400_000_000, 1u32..1515), 1..120)) {
        let s = spec();
        let pkts = stream(&steps);
        let mut b = LeakyBucket::new(s);
        for k in 0..pkts.len() {
            let got = b.update_packet(&pkts[k]).unwrap();
            let mut bytes = 0u128;
            let mut want = false;
            for j in (0..=k).rev() {
                bytes += pkts[j].size as u128;
                want |= bytes > s.th(pkts[k].arrival - pkts[j].arrival);
            }
            prop_assert_eq!(got, want, "packet {}", k);
        }
    }

    #[test]
    fn th_is_floor_affine(t in 0u64..10_000_000_000_000, dt in 0u64..1_000_000_000_000) {
        let s = spec();
        prop_assert_eq!(s.th(0), 3028);
        prop_assert_eq!(s.th(t), (12_500u128 * t as u128) / 1_000_000_000 + 3028);
        prop_assert!(s.th(t + dt) >= s.th(t));
        prop_assert!(s.th(t + dt) <= s.th(t) + s.th(dt) - 3028 + 1);
    }

    /// Counters are non-negative, hold distinct flows and never add up to more
    /// than the bytes seen.
    #[test]
    fn eardet_counters_bounded_by_traffic(
        m in 1usize..12,
        pkts in prop::collection::vec((0u64..8, 0u64..200_000, 40u32..1515), 1..300),
    ) {
        let rho = Rate::per_second(125_000_000).unwrap();
        let mut e = Eardet::new(EardetConfig::new(m, spec(), rho).unwrap());
        let mut t = 0;
        let mut total = 0.0;
        for (f, gap, size) in pkts {
            t += gap;
            e.process(&Packet::new(f, size, t)).unwrap();
            total += size as f64;
            let c = e.counters();
            prop_assert!(c.len() <= m);
            let mut ids: Vec<_> = c.iter().map(|x| x.0).collect();
            ids.sort();
            ids.dedup();
            prop_assert_eq!(ids.len(), c.len());
            prop_assert!(c.iter().all(|x| x.1 >= 0.0));
            prop_assert!(c.iter().map(|x| x.1).sum::<f64>() <= total + 1e-6);
        }
    }

    /// A flow within γt+β is never reported, whatever else shares the link,
    /// as long as the link carries at most ρ.
    #[test]
    fn eardet_never_reports_compliant_flow(
        m in 2usize..16,
        steps in prop::collection::vec((0u8..4, 40u32..1515, 0u64..3_000_000), 50..400),
    ) {
        let rho = Rate::per_second(1_250_000).unwrap();
        let cfg = EardetConfig::new(m, spec(), rho).unwrap();
        let mut e = Eardet::new(cfg);
        let mut bucket = LeakyBucket::new(spec());
        let mut t: Nanos = 0;
        for (who, size, idle) in steps {
            t += idle;
            let flow = if who == 0 {
                let mut probe = bucket;
                if probe.update(t, size as u64).unwrap() {
                    continue;
                }
                bucket = probe;
                0
            } else {
                who as u64
            };
            if let Some(d) = e.process(&Packet::new(flow, size, t)).unwrap() {
                prop_assert_ne!(d.flow, FlowId(0));
            }
            t += rho.ns_for(size as u128) as Nanos;
        }
    }

    #[test]
    fn path_digits_round_trip(m in 2usize..300, seed in any::<u64>()) {
        let mut d = 1u32;
        while (m as u128).pow(d + 1) <= 1u128 << 64 && d < 12 {
            d += 1;
        }
        let l = PathLayout::new(m, d).unwrap();
        let code = l.code(KeyedHash::new(seed, 1).hash(seed));
        let mut anc = 0;
        for k in 1..=d {
            let digit = l.digit(code, k);
            prop_assert!(digit < m);
            prop_assert_eq!(l.in_loaded_node(code, k, anc), Some(digit));
            let other = l.extend(anc, k, (digit + 1) % m);
            if k < d {
                prop_assert_eq!(l.in_loaded_node(code, k + 1, other), None);
            }
            anc = l.extend(anc, k, digit);
        }
        prop_assert_eq!(anc, code);
    }

    /// Every key the table accepted stays findable with its count.
    #[test]
    fn cuckoo_keeps_what_it_accepts(cap in 4usize..200, keys in prop::collection::vec(any::<u64>(), 1..300), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let mut t = CuckooTable::new(cap, KeyedHash::new(seed, !seed));
        let mut kept = std::collections::HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            if kept.contains_key(k) || t.find(*k).is_some() {
                continue;
            }
            if let Some(s) = t.insert(*k, &mut rng) {
                t.get_mut(s).bytes = i as u64 + 1;
                kept.insert(*k, i as u64 + 1);
            }
        }
        prop_assert_eq!(t.len(), kept.len());
        prop_assert!(t.len() <= cap);
        for (k, v) in &kept {
            let s = t.find(*k);
            prop_assert!(s.is_some());
            prop_assert_eq!(t.get_mut(s.unwrap()).bytes, *v);
        }
    }

    #[test]
    fn poisson_cdf_matches_reference(k in -5i64..400, lambda in 0.01f64..300.0) {
        let got = poisson_cdf(k, lambda);
        prop_assert!((0.0..=1.0).contains(&got));
        let want = if k < 0 { 0.0 } else { Poisson::new(lambda).unwrap().cdf(k as u64) };
        prop_assert!((got - want).abs() < 1e-9, "Q({k}, {lambda}) = {got}, reference {want}");
        prop_assert!(poisson_cdf(k + 1, lambda) >= got);
    }

    /// In the long-burst case the bound scales linearly with the first cycle.
    #[test]
    fn twin_bound_linear_in_first_cycle(alpha in 5.0f64..200.0, t_c1 in 0.01f64..0.5, scale in 1.0f64..4.0) {
        let x = TwinInputs {
            m: 50, n: 100_000, n_gamma: 100_000, alpha, theta: 1.0, t_b: 10.0, d: 4,
            t_c1, t_c2: 7.92, gamma: 50_000.0, gamma_h: 1e5 / 101.0 * 50_000.0,
        };
        let y = TwinInputs { t_c1: t_c1 * scale, ..x };
        prop_assume!(x.case() == BurstCase::Long && y.case() == BurstCase::Long);
        let (a, b) = (twin_damage_bound(&x).unwrap(), twin_damage_bound(&y).unwrap());
        if a.is_finite() {
            prop_assert!((b - a * scale).abs() <= 1e-9 * b.abs());
        } else {
            prop_assert!(b.is_infinite());
        }
    }

    #[test]
    fn trace_round_trip(steps in prop::collection::vec((any::<u64>(), 0u64..1_000_000, 1u32..1515), 0..200)) {
        let mut t = 0;
        let pkts: Vec<Packet> = steps
            .iter()
            .map(|&(f, gap, s)| {
                t += gap;
                Packet::new(f, s, t)
            })
            .collect();
        let mut buf = Vec::new();
        write_trace(&mut buf, &pkts).unwrap();
        let back: Vec<Packet> = TraceReader::new(&buf[..], 1514).collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(back, pkts);
    }

    #[test]
    fn blacklist_keeps_first_time(ops in prop::collection::vec((0u64..50, any::<u64>()), 0..500)) {
        let mut b = Blacklist::new();
        let mut first = std::collections::HashMap::new();
        for (f, at) in ops {
            let fresh = b.insert(FlowId(f), at).unwrap();
            prop_assert_eq!(fresh, !first.contains_key(&f));
            first.entry(f).or_insert(at);
        }
        prop_assert_eq!(b.len(), first.len());
        for (f, at) in first {
            prop_assert_eq!(b.detected_at(FlowId(f)), Some(at));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Every generated byte is either delivered or dropped, and only
    /// blacklisted flows lose bytes.
    #[test]
    fn simulation_conserves_bytes(seed in any::<u64>(), r_atk in 2.0f64..40.0, u in 0.0f64..=1.0) {
        let s = spec();
        // keep bursts under the 100γ link
        let lo = r_atk / 90.0;
        let theta = lo + (1.0 - lo) * u;
        let rho = Rate::per_second(1_250_000).unwrap();
        let pattern = AttackPattern::new(Rate::from_f64(r_atk * 12_500.0).unwrap(), theta, 500_000_000).unwrap();
        let cfg = SimConfig {
            spec: s,
            rho,
            background: BackgroundConfig::full_use(s.gamma),
            attacks: vec![pattern; 3],
            horizon: 5_000_000_000,
            attack_phase: true,
            record: true,
        };
        let mut det = clef_core::baseline::FlowMemory::new(clef_core::baseline::FmConfig::new(8, s, seed).unwrap());
        let out = simulate(&mut det, &cfg, &mut rng_from_seed(seed)).unwrap();
        let trace = out.trace.unwrap();
        let generated: u64 = trace.iter().map(|p| p.size as u64).sum();
        let r = &out.report;
        prop_assert_eq!(r.delivered_bytes + r.dropped_bytes, generated);
        prop_assert_eq!(r.packets, trace.len() as u64);
        for rec in out.flows.values() {
            prop_assert_eq!(rec.generated, rec.delivered + rec.dropped);
            if rec.detected.is_none() {
                prop_assert_eq!(rec.dropped, 0);
            }
        }
        prop_assert!(trace.windows(2).all(|w| w[0].arrival <= w[1].arrival));
    }
}
