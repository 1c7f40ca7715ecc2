//! Random generation of legitimate UE requests. Every draw goes through the
//! caller's RNG in a fixed field order, so a seed pins the whole stream.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Origin, PowerShare, Request, RequestIdGen, DEFAULT_C};

/// Demand distribution for legitimate traffic. All ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub ue_count: u32,
    /// Per-UE, per-slot probability of issuing a request.
    pub arrival_prob: f64,
    pub weight_range: [u32; 2],
    pub lifetime_range: [u64; 2],
    /// Deadline is the arrival slot plus an offset drawn from this range.
    pub deadline_offset_range: [u64; 2],
    /// Linear SNR of the UE link.
    pub snr_range: [f64; 2],
    /// Minimum-rate demand in bit/s.
    pub rate_demand_range: [f64; 2],
    /// Fraction of the processing budget a request asks for.
    pub processing_range: [f64; 2],
    /// Fraction of the communication power budget a request asks for.
    pub comm_power_range: [f64; 2],
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            ue_count: 3,
            arrival_prob: 0.5,
            weight_range: [1, 5],
            lifetime_range: [1, 10],
            deadline_offset_range: [1, 20],
            snr_range: [1.5, 3.0],
            rate_demand_range: [0.5 * DEFAULT_C, 3.0 * DEFAULT_C],
            processing_range: [0.05, 0.25],
            comm_power_range: [0.05, 0.25],
        }
    }
}

/// Draws one request for `ue` arriving at `slot`.
pub fn sample_request(
    ue: u32,
    slot: u64,
    cfg: &TrafficConfig,
    ids: &mut RequestIdGen,
    rng: &mut impl Rng,
) -> Request {
    let weight = rng.gen_range(cfg.weight_range[0]..=cfg.weight_range[1]);
    let lifetime = rng.gen_range(cfg.lifetime_range[0]..=cfg.lifetime_range[1]);
    let offset = rng.gen_range(cfg.deadline_offset_range[0]..=cfg.deadline_offset_range[1]);
    let snr = rng.gen_range(cfg.snr_range[0]..=cfg.snr_range[1]);
    let min_rate = rng.gen_range(cfg.rate_demand_range[0]..=cfg.rate_demand_range[1]);
    let processing = rng.gen_range(cfg.processing_range[0]..=cfg.processing_range[1]);
    let comm = rng.gen_range(cfg.comm_power_range[0]..=cfg.comm_power_range[1]);
    Request {
        id: ids.fresh(),
        origin: Origin::Ue(ue),
        weight,
        min_rate,
        min_processing: PowerShare::from_fraction(processing).expect("range checked"),
        min_comm_power: PowerShare::from_fraction(comm).expect("range checked"),
        snr,
        lifetime,
        arrival_slot: slot,
        deadline_slot: slot + offset,
    }
}

/// Bernoulli arrival per UE, in UE-index order.
pub fn generate_arrivals(
    slot: u64,
    cfg: &TrafficConfig,
    ids: &mut RequestIdGen,
    rng: &mut impl Rng,
) -> Vec<Request> {
    let mut out = Vec::new();
    for ue in 0..cfg.ue_count {
        if rng.gen_bool(cfg.arrival_prob) {
            out.push(sample_request(ue, slot, cfg, ids, rng));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fields_respect_configured_ranges() {
        let cfg = TrafficConfig::default();
        let mut ids = RequestIdGen::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for slot in 0..20_000 {
            let r = sample_request(1, slot, &cfg, &mut ids, &mut rng);
            assert!((1..=5).contains(&r.weight));
            assert!((1..=10).contains(&r.lifetime));
            assert!((1..=20).contains(&(r.deadline_slot - r.arrival_slot)));
            assert!(r.snr >= 1.5 && r.snr <= 3.0);
            assert!(
                r.min_rate >= cfg.rate_demand_range[0] && r.min_rate <= cfg.rate_demand_range[1]
            );
            let p = r.min_processing.fraction();
            assert!(p >= cfg.processing_range[0] - 1e-9 && p <= cfg.processing_range[1] + 1e-9);
        }
    }

    #[test]
    fn weight_marginal_is_uniform() {
        let cfg = TrafficConfig::default();
        let mut ids = RequestIdGen::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts = [0u64; 5];
        let n = 100_000;
        for slot in 0..n {
            let r = sample_request(0, slot, &cfg, &mut ids, &mut rng);
            counts[(r.weight - 1) as usize] += 1;
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.2).abs() < 0.01, "weight freq {freq}");
        }
    }

    #[test]
    fn arrival_count_tracks_probability() {
        let cfg = TrafficConfig::default();
        let mut ids = RequestIdGen::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut total = 0usize;
        for slot in 0..10_000 {
            total += generate_arrivals(slot, &cfg, &mut ids, &mut rng).len();
        }
        // E = 10_000 * 3 * 0.5
        let expected = 15_000.0;
        assert!(
            (total as f64 - expected).abs() / expected < 0.03,
            "saw {total} arrivals"
        );
    }

    #[test]
    fn same_seed_reproduces_stream() {
        let cfg = TrafficConfig::default();
        let take = |seed: u64| {
            let mut ids = RequestIdGen::new();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200)
                .flat_map(|slot| generate_arrivals(slot, &cfg, &mut ids, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(take(33), take(33));
        assert_ne!(take(33), take(34));
    }

    #[test]
    fn ids_are_unique_and_increasing() {
        let cfg = TrafficConfig::default();
        let mut ids = RequestIdGen::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut last = None;
        for slot in 0..500 {
            for r in generate_arrivals(slot, &cfg, &mut ids, &mut rng) {
                if let Some(prev) = last {
                    assert!(r.id > prev);
                }
                last = Some(r.id);
            }
        }
    }
}
