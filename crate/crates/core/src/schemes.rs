//! gNodeB admission schemes: the Q-learning scheduler and the myopic, FCFS
//! and random baselines. Schemes mutate the pool as they admit and return the
//! grants they carved out; the caller removes admitted requests from the
//! waiting list.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{ActiveGrant, LinkParams, Request, RequestId, ResourcePool};
use crate::rl::{epsilon_at, QHyperparams, QTable, StateKey};

/// Which admission scheme the gNodeB runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    QLearning,
    Myopic,
    Fcfs,
    Random,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::QLearning => "qlearning",
            SchemeKind::Myopic => "myopic",
            SchemeKind::Fcfs => "fcfs",
            SchemeKind::Random => "random",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qlearning" => Ok(SchemeKind::QLearning),
            "myopic" => Ok(SchemeKind::Myopic),
            "fcfs" => Ok(SchemeKind::Fcfs),
            "random" => Ok(SchemeKind::Random),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

/// Requests waiting for service, in arrival order.
#[derive(Debug, Clone, Default)]
pub struct ActiveSet {
    reqs: Vec<Request>,
}

impl ActiveSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, req: Request) {
        self.reqs.push(req);
    }

    /// Removes and returns requests whose deadline has passed at `slot`.
    pub fn expire(&mut self, slot: u64) -> Vec<Request> {
        let (gone, keep) = self
            .reqs
            .drain(..)
            .partition(|r| r.deadline_slot < slot);
        self.reqs = keep;
        gone
    }

    /// Removes the requests picked by a decision, preserving order.
    pub fn take(&mut self, ids: &[RequestId]) -> Vec<Request> {
        let (taken, keep) = self.reqs.drain(..).partition(|r| ids.contains(&r.id));
        self.reqs = keep;
        taken
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Request> {
        self.reqs.iter()
    }

    pub fn len(&self) -> usize {
        self.reqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reqs.is_empty()
    }
}

/// One slot's admissions.
#[derive(Debug, Clone, Default)]
pub struct Decision {
    pub admitted: Vec<ActiveGrant>,
}

impl Decision {
    pub fn ids(&self) -> Vec<RequestId> {
        self.admitted.iter().map(|g| g.request_id).collect()
    }
}

/// Action indices for the Q-learning scheme. Fresh states tie at zero and the
/// argmax tie-break lands on the lower index, so an untrained gNodeB admits.
pub const ACTION_ADMIT: usize = 0;
pub const ACTION_SKIP: usize = 1;

/// Q-learning admission state: free RBs and the candidate's weight, packed
/// injectively into a key. The candidate's exact resource demand and the
/// power headroom are left out on purpose: they are enforced as a hard
/// feasibility check at admission instead, and folding them in would blow up
/// the state space well past what a run can visit often enough to rank
/// candidates reliably.
pub fn encode_state(pool: &ResourcePool, weight: u32) -> StateKey {
    let free = pool.free_rbs as u64;
    let w = (weight as u64).min(63);
    StateKey(free * 64 + w)
}

/// Mutable learner state for the Q-learning scheme.
#[derive(Debug, Clone)]
pub struct QlScheme {
    pub table: QTable,
    pub hp: QHyperparams,
    /// Last (state, action, reward) awaiting its successor state.
    pending: Option<(StateKey, usize, f64)>,
}

impl QlScheme {
    pub fn new(hp: QHyperparams) -> Self {
        QlScheme {
            table: QTable::new(),
            hp,
            pending: None,
        }
    }
}

/// Q-learning admission: walk the waiting list in order of learned
/// attractiveness (admit-minus-skip value against the slot's opening pool)
/// and pick admit/skip per request epsilon-greedily, granting at most
/// `budget` requests per slot. Within a value class the newest candidate
/// goes first: a fresh demand was sized against the pool as it stands,
/// while older ones have already been passed over and their sizing has gone
/// stale. An admit that no longer fits, or that arrives after the slot's
/// grant budget is spent, is executed as a skip and learned as the skip it
/// was: booking impossible admissions would only teach the table that its
/// best states are worthless. Each decision's backup target is the next
/// decision state, which may be in a later slot.
pub fn decide_ql(
    scheme: &mut QlScheme,
    active: &ActiveSet,
    pool: &mut ResourcePool,
    slot: u64,
    link: &LinkParams,
    budget: u32,
    rng: &mut impl Rng,
) -> Decision {
    let epsilon = epsilon_at(slot, &scheme.hp);
    let mut order: Vec<(f64, &Request)> = active
        .iter()
        .map(|r| {
            let s = encode_state(pool, r.weight);
            let adv = scheme.table.get(s, ACTION_ADMIT) - scheme.table.get(s, ACTION_SKIP);
            (adv, r)
        })
        .collect();
    order.sort_by(|(adv_a, a), (adv_b, b)| adv_b.total_cmp(adv_a).then(b.id.cmp(&a.id)));

    let mut decision = Decision::default();
    for (_, req) in order {
        let state = encode_state(pool, req.weight);
        scheme.table.ensure_state(state, 2);
        if let Some((ps, pa, pr)) = scheme.pending.take() {
            scheme.table.update(ps, pa, pr, state, &scheme.hp);
        }
        let action = scheme.table.select_action(state, epsilon, rng);
        let mut executed = ACTION_SKIP;
        let mut reward = 0.0;
        if action == ACTION_ADMIT
            && decision.admitted.len() < budget as usize
            && pool.feasible(req, link)
        {
            let grant = pool
                .allocate(req, slot, link)
                .expect("feasibility just checked");
            decision.admitted.push(grant);
            executed = ACTION_ADMIT;
            reward = req.weight as f64;
        }
        scheme.pending = Some((state, executed, reward));
    }
    decision
}

/// Greedy baseline: highest weight first, cheaper RB demand and earlier
/// arrival breaking ties; admit whatever still fits within the grant budget.
pub fn decide_myopic(
    active: &ActiveSet,
    pool: &mut ResourcePool,
    slot: u64,
    link: &LinkParams,
    budget: u32,
) -> Decision {
    let mut order: Vec<&Request> = active.iter().collect();
    order.sort_by_key(|r| {
        (
            std::cmp::Reverse(r.weight),
            r.needed_rbs(link),
            r.arrival_slot,
            r.id,
        )
    });
    admit_in_order(&order, pool, slot, link, budget)
}

/// First-come-first-served: arrival order, ties already resolved by UE index
/// at generation time.
pub fn decide_fcfs(
    active: &ActiveSet,
    pool: &mut ResourcePool,
    slot: u64,
    link: &LinkParams,
    budget: u32,
) -> Decision {
    let order: Vec<&Request> = active.iter().collect();
    admit_in_order(&order, pool, slot, link, budget)
}

/// Uniformly shuffled admission order.
pub fn decide_random(
    active: &ActiveSet,
    pool: &mut ResourcePool,
    slot: u64,
    link: &LinkParams,
    budget: u32,
    rng: &mut impl Rng,
) -> Decision {
    let mut order: Vec<&Request> = active.iter().collect();
    order.shuffle(rng);
    admit_in_order(&order, pool, slot, link, budget)
}

/// Admit in the given order, skipping whatever no longer fits, until the
/// slot's grant budget is spent.
fn admit_in_order(
    order: &[&Request],
    pool: &mut ResourcePool,
    slot: u64,
    link: &LinkParams,
    budget: u32,
) -> Decision {
    let mut decision = Decision::default();
    for req in order {
        if decision.admitted.len() >= budget as usize {
            break;
        }
        if pool.feasible(req, link) {
            let grant = pool
                .allocate(req, slot, link)
                .expect("feasibility just checked");
            decision.admitted.push(grant);
        }
    }
    decision
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Origin, PowerShare};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn req(id: u64, weight: u32, rbs: u32, share: f64, link: &LinkParams) -> Request {
        Request {
            id: RequestId(id),
            origin: Origin::Ue(id as u32),
            weight,
            min_rate: link.c * rbs as f64,
            min_processing: PowerShare::from_fraction(share).unwrap(),
            min_comm_power: PowerShare::from_fraction(share).unwrap(),
            snr: 1e6,
            lifetime: 2,
            arrival_slot: 0,
            deadline_slot: 30,
        }
    }

    fn set_of(reqs: Vec<Request>) -> ActiveSet {
        let mut s = ActiveSet::new();
        for r in reqs {
            s.push(r);
        }
        s
    }

    #[test]
    fn expire_drops_past_deadlines() {
        let link = LinkParams::default();
        let mut a = req(1, 3, 1, 0.1, &link);
        a.deadline_slot = 9;
        let b = req(2, 3, 1, 0.1, &link);
        let mut set = set_of(vec![a, b]);
        let gone = set.expire(10);
        assert_eq!(gone.len(), 1);
        assert_eq!(gone[0].id, RequestId(1));
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn myopic_prefers_weight_over_fit() {
        let link = LinkParams::default();
        let mut pool = ResourcePool::full(11);
        pool.free_rbs = 2;
        let set = set_of(vec![req(1, 4, 1, 0.05, &link), req(2, 5, 2, 0.05, &link)]);
        let d = decide_myopic(&set, &mut pool, 0, &link, u32::MAX);
        assert_eq!(d.ids(), vec![RequestId(2)]);
        assert_eq!(pool.free_rbs, 0);
    }

    #[test]
    fn fcfs_serves_in_arrival_order() {
        let link = LinkParams::default();
        let mut pool = ResourcePool::full(11);
        let set = set_of(vec![req(1, 1, 11, 0.05, &link), req(2, 5, 1, 0.05, &link)]);
        let d = decide_fcfs(&set, &mut pool, 0, &link, u32::MAX);
        assert_eq!(d.ids(), vec![RequestId(1)]);
    }

    #[test]
    fn random_splits_capacity_one_evenly() {
        let link = LinkParams::default();
        let set = set_of(vec![req(1, 1, 11, 0.1, &link), req(2, 1, 11, 0.1, &link)]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut first = 0u32;
        let trials = 10_000;
        for _ in 0..trials {
            let mut pool = ResourcePool::full(11);
            let d = decide_random(&set, &mut pool, 0, &link, u32::MAX, &mut rng);
            assert_eq!(d.admitted.len(), 1);
            if d.ids()[0] == RequestId(1) {
                first += 1;
            }
        }
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.02, "freq {freq}");
    }

    #[test]
    fn ql_admits_everything_with_pretrained_table() {
        let link = LinkParams::default();
        let hp = QHyperparams {
            epsilon_start: 0.0,
            epsilon_end: 0.0,
            ..QHyperparams::default()
        };
        let mut scheme = QlScheme::new(hp);
        // Fresh states tie at zero and tie-break to admit, so no pre-training
        // is even needed; make the preference explicit anyway.
        let set = set_of(vec![req(1, 5, 5, 0.2, &link), req(2, 5, 5, 0.2, &link)]);
        let mut pool = ResourcePool::full(11);
        for r in set.iter() {
            let s = encode_state(&pool, r.weight);
            scheme.table.ensure_state(s, 2);
            scheme.table.set(s, ACTION_ADMIT, 1.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = decide_ql(&mut scheme, &set, &mut pool, 0, &link, u32::MAX, &mut rng);
        assert_eq!(d.admitted.len(), 2);
        assert_eq!(pool.free_rbs, 1);
    }

    #[test]
    fn ql_grant_budget_caps_admissions_per_slot() {
        let link = LinkParams::default();
        let hp = QHyperparams {
            epsilon_start: 0.0,
            epsilon_end: 0.0,
            ..QHyperparams::default()
        };
        let mut scheme = QlScheme::new(hp);
        let set = set_of(vec![req(1, 5, 1, 0.05, &link), req(2, 5, 1, 0.05, &link)]);
        let mut pool = ResourcePool::full(11);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = decide_ql(&mut scheme, &set, &mut pool, 0, &link, 1, &mut rng);
        assert_eq!(d.admitted.len(), 1);
        assert_eq!(pool.free_rbs, 10);
    }

    #[test]
    fn ql_infeasible_admit_is_executed_as_skip() {
        let link = LinkParams::default();
        let mut pool = ResourcePool::full(2);
        let mut scheme = QlScheme::new(QHyperparams {
            epsilon_start: 0.0,
            epsilon_end: 0.0,
            ..QHyperparams::default()
        });
        let set = set_of(vec![req(1, 5, 5, 0.1, &link)]);
        let before = pool.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = decide_ql(&mut scheme, &set, &mut pool, 0, &link, u32::MAX, &mut rng);
        assert!(d.admitted.is_empty());
        assert_eq!(pool, before);
    }

    #[test]
    fn ql_walks_by_learned_advantage() {
        let link = LinkParams::default();
        let mut pool = ResourcePool::full(11);
        pool.free_rbs = 1;
        // Distinct states: the low-weight request is pre-trained as the
        // better admit, so it must claim the last RB regardless of queue
        // position or id order.
        let favored = req(7, 2, 1, 0.05, &link);
        let other = req(3, 5, 1, 0.05, &link);
        let set = set_of(vec![other.clone(), favored.clone()]);
        let mut scheme = QlScheme::new(QHyperparams {
            epsilon_start: 0.0,
            epsilon_end: 0.0,
            ..QHyperparams::default()
        });
        let s = encode_state(&pool, favored.weight);
        scheme.table.ensure_state(s, 2);
        scheme.table.set(s, ACTION_ADMIT, 10.0);
        for seed in 0..20 {
            let mut p = pool.clone();
            let mut sc = scheme.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = decide_ql(&mut sc, &set, &mut p, 0, &link, 1, &mut rng);
            assert_eq!(d.ids(), vec![RequestId(7)]);
        }
    }

    #[test]
    fn ql_breaks_value_ties_toward_newest() {
        let link = LinkParams::default();
        let mut pool = ResourcePool::full(11);
        // Same weight, same state, untrained table: only the one grant fits
        // the budget, and it must go to the higher (newer) id.
        let set = set_of(vec![req(3, 4, 1, 0.05, &link), req(9, 4, 1, 0.05, &link)]);
        let mut scheme = QlScheme::new(QHyperparams {
            epsilon_start: 0.0,
            epsilon_end: 0.0,
            ..QHyperparams::default()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = decide_ql(&mut scheme, &set, &mut pool, 0, &link, 1, &mut rng);
        assert_eq!(d.ids(), vec![RequestId(9)]);
    }

    #[test]
    fn encode_state_is_injective_over_its_fields() {
        use std::collections::HashSet;
        let mut keys = HashSet::new();
        let mut pool = ResourcePool::full(11);
        for free in 0..=11u32 {
            pool.free_rbs = free;
            for w in 1..=5u32 {
                let k = encode_state(&pool, w);
                assert!(keys.insert(k.0), "collision at {free}/{w}");
            }
        }
    }

    #[test]
    fn encode_state_ignores_power_headroom() {
        let mut pool = ResourcePool::full(11);
        let a = encode_state(&pool, 3);
        pool.free_processing = PowerShare::from_fraction(0.1).unwrap();
        pool.free_comm_power = PowerShare::from_fraction(0.9).unwrap();
        assert_eq!(a, encode_state(&pool, 3));
    }

    /// Exhaustive-subset optimum used as the greedy regression oracle.
    fn brute_force_best(reqs: &[Request], pool: &ResourcePool, link: &LinkParams) -> u64 {
        let n = reqs.len();
        let mut best = 0u64;
        for mask in 0u32..(1 << n) {
            let mut rbs = 0u64;
            let mut proc = 0u64;
            let mut comm = 0u64;
            let mut w = 0u64;
            for (i, r) in reqs.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    rbs += r.needed_rbs(link) as u64;
                    proc += r.min_processing.units() as u64;
                    comm += r.min_comm_power.units() as u64;
                    w += r.weight as u64;
                }
            }
            if rbs <= pool.free_rbs as u64
                && proc <= pool.free_processing.units() as u64
                && comm <= pool.free_comm_power.units() as u64
            {
                best = best.max(w);
            }
        }
        best
    }

    fn random_instance(rng: &mut impl Rng, link: &LinkParams) -> (Vec<Request>, ResourcePool) {
        let n = rng.gen_range(3..=6);
        let reqs = (0..n)
            .map(|i| {
                req(
                    i,
                    rng.gen_range(1..=5),
                    rng.gen_range(1..=4),
                    rng.gen_range(0.05..0.25),
                    link,
                )
            })
            .collect();
        (reqs, ResourcePool::full(rng.gen_range(3..=8)))
    }

    fn admitted_weight(d: &Decision, reqs: &[Request]) -> u64 {
        d.ids()
            .iter()
            .map(|id| reqs.iter().find(|r| r.id == *id).unwrap().weight as u64)
            .sum()
    }

    #[test]
    fn myopic_stays_near_brute_force_optimum() {
        let link = LinkParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for case in 0..30 {
            let (reqs, pool) = random_instance(&mut rng, &link);
            let optimum = brute_force_best(&reqs, &pool, &link);
            let mut p = pool.clone();
            let d = decide_myopic(&set_of(reqs.clone()), &mut p, 0, &link, u32::MAX);
            let greedy = admitted_weight(&d, &reqs);
            assert!(
                greedy as f64 >= 0.85 * optimum as f64,
                "case {case}: greedy {greedy} vs optimum {optimum}"
            );
        }
    }

    #[test]
    fn fcfs_rarely_beats_myopic() {
        let link = LinkParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let trials = 50;
        let mut myopic_at_least = 0;
        for _ in 0..trials {
            let (reqs, pool) = random_instance(&mut rng, &link);
            let mut p1 = pool.clone();
            let m = admitted_weight(
                &decide_myopic(&set_of(reqs.clone()), &mut p1, 0, &link, u32::MAX),
                &reqs,
            );
            let mut p2 = pool.clone();
            let f = admitted_weight(
                &decide_fcfs(&set_of(reqs.clone()), &mut p2, 0, &link, u32::MAX),
                &reqs,
            );
            if f <= m {
                myopic_at_least += 1;
            }
        }
        assert!(
            myopic_at_least as f64 >= 0.6 * trials as f64,
            "myopic >= fcfs on only {myopic_at_least}/{trials} instances"
        );
    }
}
