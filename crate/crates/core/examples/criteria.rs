//! Dev tool: evaluate every empirical ordering/trend the default
//! configuration is expected to satisfy, with margins, over seeds 1..=5.

use slicesim::engine::{run, SimConfig};
use slicesim::sweep::{
    median_ratio, median_real_reward, median_total_reward, run_sweep, SweepAxis, SweepSpec,
};
use slicesim::{parse_axis_value, AxisValue, DEFAULT_C};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn env_f64(name: &str) -> Option<f64> {
    std::env::var(name).ok().map(|v| v.parse().unwrap())
}

/// Default config with env overrides, so regimes can be scanned without
/// recompiling: RD_LO/RD_HI (rate demand, multiples of c), ATT_ALPHA,
/// ATT_GAMMA, ATT_EPS0/ATT_EPS1, GNB_EPS0/GNB_EPS1.
fn base() -> SimConfig {
    let mut cfg = SimConfig::default();
    if let Some(v) = env_f64("RD_LO") {
        cfg.traffic.rate_demand_range[0] = v * DEFAULT_C;
    }
    if let Some(v) = env_f64("RD_HI") {
        cfg.traffic.rate_demand_range[1] = v * DEFAULT_C;
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
    if let Some(v) = env_f64("GNB_EPS0") {
        cfg.gnb_hp.epsilon_start = v;
    }
    if let Some(v) = env_f64("GNB_EPS1") {
        cfg.gnb_hp.epsilon_end = v;
    }
    if let Some(v) = env_f64("GRANTS") {
        cfg.grants_per_slot = v as u32;
    }
    cfg
}

fn sweep(axis: SweepAxis, raw: &[&str]) -> (Vec<AxisValue>, Vec<slicesim::ResultRow>) {
    let values: Vec<_> = raw
        .iter()
        .map(|s| parse_axis_value(axis, s).unwrap())
        .collect();
    let spec = SweepSpec {
        axis,
        values: values.clone(),
        seeds: SEEDS.to_vec(),
        base: base(),
    };
    let rows = run_sweep(&spec).unwrap();
    (values, rows)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() {
    let t0 = std::time::Instant::now();

    // C1: attack-strategy ordering and total-reward lift
    let (vals, rows) = sweep(
        SweepAxis::AttackStrategy,
        &["qlearning", "minres", "random", "none"],
    );
    let real: Vec<f64> = vals
        .iter()
        .map(|v| median_real_reward(&rows, *v).unwrap())
        .collect();
    let total: Vec<f64> = vals
        .iter()
        .map(|v| median_total_reward(&rows, *v).unwrap())
        .collect();
    let c1 = real[0] < real[1]
        && real[1] < real[2]
        && real[2] < real[3]
        && total[0] > total[3]
        && total[1] > total[3];
    println!(
        "C1 {} real ql {:.0} < minres {:.0} < random {:.0} < none {:.0}; totals {:.0}/{:.0} > {:.0}",
        verdict(c1),
        real[0],
        real[1],
        real[2],
        real[3],
        total[0],
        total[1],
        total[3]
    );

    // C2: rate sweep, strictly decreasing then flat
    let (vals, rows) = sweep(
        SweepAxis::FakeRate,
        &["0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.7", "1.0"],
    );
    let med: Vec<f64> = vals
        .iter()
        .map(|v| median_real_reward(&rows, *v).unwrap())
        .collect();
    let decreasing = med.windows(2).take(5).all(|w| w[0] > w[1]);
    let flat = (med[6] - med[7]).abs() / med[6] < 0.15;
    println!(
        "C2 {} rates {:?} decreasing {} flat(0.7->1.0) {:.1}%",
        verdict(decreasing && flat),
        med.iter().map(|m| m.round()).collect::<Vec<_>>(),
        decreasing,
        100.0 * (med[6] - med[7]).abs() / med[6]
    );

    // C3: RB-count ratio trend
    let (vals, rows) = sweep(SweepAxis::RbCount, &["5", "12"]);
    let r5 = median_ratio(&rows, vals[0]).unwrap();
    let r12 = median_ratio(&rows, vals[1]).unwrap();
    println!(
        "C3 {} ratio rb5 {:.2}% > rb12 {:.2}% (margin {:+.2})",
        verdict(r5 > r12),
        r5,
        r12,
        r5 - r12
    );

    // C4: UE-count ratio trend
    let (vals, rows) = sweep(SweepAxis::UeCount, &["3", "50"]);
    let u3 = median_ratio(&rows, vals[0]).unwrap();
    let u50 = median_ratio(&rows, vals[1]).unwrap();
    println!(
        "C4 {} ratio ue50 {:.2}% > ue3 {:.2}% (margin {:+.2})",
        verdict(u50 > u3),
        u50,
        u3,
        u50 - u3
    );

    // C5: SNR-band ratio ordering
    let (vals, rows) = sweep(SweepAxis::SnrBand, &["low", "medium", "high"]);
    let lo = median_ratio(&rows, vals[0]).unwrap();
    let mid = median_ratio(&rows, vals[1]).unwrap();
    let hi = median_ratio(&rows, vals[2]).unwrap();
    println!(
        "C5 {} ratio low {:.2} < medium {:.2} < high {:.2}",
        verdict(lo < mid && mid < hi),
        lo,
        mid,
        hi
    );

    // C6: weight-policy orderings plus AW2 emitted-weight uniformity
    let (vals, rows) = sweep(
        SweepAxis::WeightPolicy,
        &["LW", "UW", "ULW", "RDW", "RDLW", "AW1", "AW2", "AW3"],
    );
    let med: Vec<f64> = vals
        .iter()
        .map(|v| median_real_reward(&rows, *v).unwrap())
        .collect();
    let lw_min = med.iter().skip(1).all(|m| med[0] < *m);
    let ulw_uw = med[2] < med[1];
    let rdlw_rdw = med[4] < med[3];
    let mut tvs = Vec::new();
    for seed in SEEDS {
        let mut cfg = base();
        cfg.seed = seed;
        cfg.attack.weight_policy = slicesim::WeightPolicy::Aw2;
        let rep = run(&cfg).unwrap();
        let n: u64 = rep.fake_weight_histogram.iter().sum();
        let tv: f64 = rep
            .fake_weight_histogram
            .iter()
            .map(|&c| (c as f64 / n as f64 - 0.2).abs())
            .sum::<f64>()
            / 2.0;
        tvs.push(tv);
    }
    tvs.sort_by(f64::total_cmp);
    let tv_med = tvs[2];
    println!(
        "C6 {} LW {:.0} min {} | ULW {:.0} < UW {:.0} {} | RDLW {:.0} < RDW {:.0} {} | AW2 TV {:.3} {} | AW1 {:.0} AW2 {:.0} AW3 {:.0}",
        verdict(lw_min && ulw_uw && rdlw_rdw && tv_med < 0.1),
        med[0],
        lw_min,
        med[2],
        med[1],
        ulw_uw,
        med[4],
        med[3],
        rdlw_rdw,
        tv_med,
        tv_med < 0.1,
        med[5],
        med[6],
        med[7]
    );

    // C11: sensing-error robustness
    let (vals, rows) = sweep(SweepAxis::SensingError, &["0", "0.2"]);
    let clean = median_real_reward(&rows, vals[0]).unwrap();
    let noisy = median_real_reward(&rows, vals[1]).unwrap();
    let change = (noisy - clean).abs() / clean;
    println!(
        "C11 {} real {:.0} vs {:.0} with sensing errors ({:.1}% change)",
        verdict(change <= 0.15),
        clean,
        noisy,
        100.0 * change
    );

    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
