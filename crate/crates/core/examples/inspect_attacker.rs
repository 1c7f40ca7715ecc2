//! Dev tool: what does the adversary actually learn to demand? For a few pool
//! sizes, histogram the RB demands of emitted fakes, their queueing delay,
//! and the final Q-table argmax per observed-free state.

use std::collections::HashMap;

use slicesim::engine::{SimConfig, Simulation};
use slicesim::model::RequestId;

fn env_f64(name: &str) -> Option<f64> {
    std::env::var(name).ok().map(|v| v.parse().unwrap())
}

fn main() {
    for rb in [5u32, 11, 12] {
        let mut cfg = SimConfig::default();
        if let Some(v) = env_f64("RD_LO") {
            cfg.traffic.rate_demand_range[0] = v * slicesim::DEFAULT_C;
        }
        if let Some(v) = env_f64("RD_HI") {
            cfg.traffic.rate_demand_range[1] = v * slicesim::DEFAULT_C;
        }
        if let Some(v) = env_f64("ATT_ALPHA") {
            cfg.attacker_hp.alpha = v;
        }
        if let Some(v) = env_f64("ATT_GAMMA") {
            cfg.attacker_hp.gamma = v;
        }
        if let Some(v) = env_f64("ATT_EPS0") {
            cfg.attacker_hp.epsilon_start = v;
        }
        if let Some(v) = env_f64("ATT_EPS1") {
            cfg.attacker_hp.epsilon_end = v;
        }
        if let Some(v) = env_f64("GRANTS") {
            cfg.grants_per_slot = v as u32;
        }
        if let Ok(s) = std::env::var("ATT_STRAT") {
            cfg.attack.strategy = match s.as_str() {
                "minres" => slicesim::attacker::AttackStrategy::MinRes,
                "random" => slicesim::attacker::AttackStrategy::Random,
                _ => slicesim::attacker::AttackStrategy::QLearning,
            };
        }
        if let Ok(s) = std::env::var("WP") {
            cfg.attack.weight_policy = s.parse().unwrap();
        }
        cfg.link.rb_count = rb;
        let mut sim = Simulation::new(&cfg).unwrap();

        let mut emitted_k = vec![0u64; rb as usize + 1];
        let mut emit_slot: HashMap<RequestId, u64> = HashMap::new();
        let mut served_fakes = 0u64;
        let mut delay_sum = 0u64;
        let mut delay_hist = [0u64; 5];
        let mut serve_slots = 0u64;
        let mut emissions = 0u64;
        let mut real_picks = 0u64;
        let mut idle_slots = 0u64;
        let mut free_hist = vec![0u64; rb as usize + 1];
        let mut power_tight = 0u64;

        for _ in 0..cfg.total_slots {
            {
                let pool = sim.pool();
                free_hist[pool.free_rbs as usize] += 1;
                let tight = slicesim::model::PowerShare::from_fraction(0.1).unwrap();
                if pool.free_processing < tight || pool.free_comm_power < tight {
                    power_tight += 1;
                }
            }
            let s = sim.step();
            if let Some(req) = &s.emitted {
                let k = req.needed_rbs(&cfg.link) as usize;
                emitted_k[k.min(rb as usize)] += 1;
                emit_slot.insert(req.id, s.slot);
                emissions += 1;
            }
            let mut any_fake = false;
            for (req, _) in &s.served {
                if let Some(t0) = emit_slot.remove(&req.id) {
                    served_fakes += 1;
                    let d = s.slot - t0;
                    delay_sum += d;
                    delay_hist[(d as usize).min(4)] += 1;
                    any_fake = true;
                } else {
                    real_picks += 1;
                }
            }
            if any_fake {
                serve_slots += 1;
            }
            if s.served.is_empty() {
                idle_slots += 1;
            }
        }

        let report = sim.report();
        let mean_k: f64 = emitted_k
            .iter()
            .enumerate()
            .map(|(k, &n)| k as f64 * n as f64)
            .sum::<f64>()
            / emissions as f64;
        println!("== rb_count {rb} ==");
        println!(
            "emitted {emissions} mean_k {mean_k:.2} hist {:?}",
            &emitted_k[1..]
        );
        println!(
            "served fakes {served_fakes} ({:.0}%) mean delay {:.2} slots, fake-serve slots {serve_slots}",
            100.0 * served_fakes as f64 / emissions as f64,
            delay_sum as f64 / served_fakes.max(1) as f64
        );
        println!(
            "fake delay hist 0/1/2/3/4+ {:?} dead {}",
            delay_hist,
            emissions - served_fakes - emit_slot.len() as u64
        );
        println!(
            "pool at slot start: free hist {:?} power-tight slots {}",
            free_hist, power_tight
        );
        println!(
            "picks: real {real_picks} fake {served_fakes} idle slots {idle_slots} (of {})",
            cfg.total_slots
        );
        println!(
            "window real {} fake {} total {} requested_real {}",
            report.real_reward, report.fake_reward, report.total_reward, report.requested_real_reward
        );
        println!("window fake weight hist {:?}", report.fake_weight_histogram);
        if let Some(table) = sim.attacker_table() {
            for state in 0..=rb {
                let key = slicesim::rl::StateKey(state as u64);
                let n = state as usize + 1;
                let row: Vec<f64> = (0..n).map(|a| table.get(key, a)).collect();
                let argmax = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap();
                let shown: Vec<String> = row.iter().map(|q| format!("{q:.1}")).collect();
                println!("  free {state}: argmax {argmax} q [{}]", shown.join(" "));
            }
        }
        println!();
    }
}
