//! Dev tool: scan candidate rate-demand ranges and report the empirical
//! orderings the default configuration is supposed to exhibit.

use slicesim::engine::{run, SimConfig};
use slicesim::model::DEFAULT_C;
use slicesim::sweep::{median_real_reward, median_total_reward, run_sweep, SweepAxis, SweepSpec};
use slicesim::{parse_axis_value, AttackStrategy};

fn medians(axis: SweepAxis, raw: &[&str], base: &SimConfig) -> Vec<(String, f64, f64)> {
    let values: Vec<_> = raw
        .iter()
        .map(|s| parse_axis_value(axis, s).unwrap())
        .collect();
    let spec = SweepSpec {
        axis,
        values: values.clone(),
        seeds: vec![1, 2, 3, 4, 5],
        base: base.clone(),
    };
    let rows = run_sweep(&spec).unwrap();
    values
        .iter()
        .map(|v| {
            (
                v.to_string(),
                median_real_reward(&rows, *v).unwrap(),
                median_total_reward(&rows, *v).unwrap(),
            )
        })
        .collect()
}

fn main() {
    let candidates: [(f64, f64); 5] = [(0.5, 3.0), (1.0, 4.0), (1.0, 5.0), (1.5, 5.0), (2.0, 6.0)];
    for (lo, hi) in candidates {
        let mut base = SimConfig::default();
        base.traffic.rate_demand_range = [lo * DEFAULT_C, hi * DEFAULT_C];

        // no-attack service fraction
        let mut cfg = base.clone();
        cfg.attack.strategy = AttackStrategy::None;
        cfg.seed = 1;
        let report = run(&cfg).unwrap();
        println!(
            "== demand [{lo}c,{hi}c]: no-attack real {} of asked {} ({:.0}%)",
            report.real_reward,
            report.requested_real_reward,
            100.0 * report.real_reward as f64 / report.requested_real_reward as f64
        );

        let strat = medians(
            SweepAxis::AttackStrategy,
            &["qlearning", "minres", "random", "none"],
            &base,
        );
        print!("   strategies:");
        for (name, real, total) in &strat {
            print!("  {name} {real:.0}/{total:.0}");
        }
        let ok = strat[0].1 < strat[1].1
            && strat[1].1 < strat[2].1
            && strat[2].1 < strat[3].1
            && strat[0].2 > strat[3].2
            && strat[1].2 > strat[3].2;
        println!("   C1 {}", if ok { "PASS" } else { "fail" });

        let pol = medians(
            SweepAxis::WeightPolicy,
            &["LW", "UW", "ULW", "RDW", "RDLW"],
            &base,
        );
        print!("   policies:  ");
        for (name, real, _) in &pol {
            print!("  {name} {real:.0}");
        }
        let lw = pol[0].1;
        let ok = pol.iter().skip(1).all(|(_, r, _)| lw < *r)
            && pol[2].1 < pol[1].1
            && pol[4].1 < pol[3].1;
        println!("   C6 {}", if ok { "PASS" } else { "fail" });
    }
}
