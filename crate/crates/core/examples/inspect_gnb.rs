//! Dev tool: run a default simulation and summarize what the admission
//! learner's table says about admit-vs-skip by weight, demand, and free RBs.

use std::collections::BTreeMap;

use slicesim::engine::{SimConfig, Simulation};

fn main() {
    let cfg = SimConfig::default();
    let mut sim = Simulation::new(&cfg).unwrap();
    for _ in 0..cfg.total_slots {
        sim.step();
    }
    let table = sim.gnb_table().expect("default scheme learns");
    println!("states learned: {}", table.state_count());

    // state key layout: (((free*10 + pbin)*10 + cbin)*64 + w)*need_radix + need
    let need_radix = u64::from(cfg.link.rb_count) + 1;
    let mut buf = Vec::new();
    table.dump(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut rows: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        let s: u64 = it.next().unwrap().parse().unwrap();
        let a: usize = it.next().unwrap().parse().unwrap();
        let v: f64 = it.next().unwrap().parse().unwrap();
        let row = rows.entry(s).or_default();
        if row.len() <= a {
            row.resize(a + 1, 0.0);
        }
        row[a] = v;
    }

    struct Cell {
        adv_sum: f64,
        v_sum: f64,
        n: u64,
        neg: u64,
    }
    let mut by_free_w: BTreeMap<(u64, u64), Cell> = BTreeMap::new();
    let mut by_free_need: BTreeMap<(u64, u64), Cell> = BTreeMap::new();
    let mut v_by_free: BTreeMap<u64, (f64, u64)> = BTreeMap::new();
    for (s, vs) in &rows {
        let need = s % need_radix;
        let w = (s / need_radix) % 64;
        let rest = s / need_radix / 64;
        let _cbin = rest % 10;
        let rest = rest / 10;
        let _pbin = rest % 10;
        let free = rest / 10;
        if vs.len() != 2 {
            continue;
        }
        let v = vs[0].max(vs[1]);
        let e = v_by_free.entry(free).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
        if need > 0 && need <= free {
            let adv = vs[0] - vs[1];
            let mut book = |map: &mut BTreeMap<(u64, u64), Cell>, key: (u64, u64)| {
                let c = map.entry(key).or_insert(Cell {
                    adv_sum: 0.0,
                    v_sum: 0.0,
                    n: 0,
                    neg: 0,
                });
                c.adv_sum += adv;
                c.v_sum += v;
                c.n += 1;
                if adv < 0.0 {
                    c.neg += 1;
                }
            };
            book(&mut by_free_w, (free, w));
            book(&mut by_free_need, (free, need));
        }
    }

    println!("mean max-Q by free RBs (all visited states):");
    for (free, (sum, n)) in &v_by_free {
        println!("  free {free:>2}: V {:>7.2}  ({n} states)", sum / *n as f64);
    }

    let dump = |label: &str, map: &BTreeMap<(u64, u64), Cell>, hi: u64| {
        println!("mean Q(admit)-Q(skip) over feasible states, by (free, {label}):");
        print!("{:>5}", "free");
        for k in 1..=hi {
            print!("  {:>11}", format!("{label}={k}"));
        }
        println!();
        for free in 1..=u64::from(cfg.link.rb_count) {
            print!("{free:>5}");
            for k in 1..=hi {
                match map.get(&(free, k)) {
                    Some(c) => print!(
                        "  {:>6.2} {:>3}-",
                        c.adv_sum / c.n as f64,
                        format!("{}", c.neg)
                    ),
                    None => print!("  {:>11}", "-"),
                }
            }
            println!();
        }
    };
    dump("w", &by_free_w, 5);
    dump("need", &by_free_need, 6);
}
