//! The flooding adversary: senses free RBs (imperfectly), rate-limits its
//! emissions, picks an RB demand by strategy, and dresses fake requests in a
//! weight chosen by one of eight policies.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    ber_from_snr, LinkParams, ModelError, Origin, PowerShare, Request, RequestIdGen,
};
use crate::rl::{QHyperparams, QTable, StateKey};
use crate::traffic::TrafficConfig;

/// Tolerance for weight-table stochasticity and row-mean checks.
pub const TABLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum AttackError {
    #[error("weight table must be rectangular and non-empty")]
    MalformedTable,
    #[error("weight table parse error: {0}")]
    TableParse(String),
    #[error("remaining-RB state {0} outside weight table range 1..={1}")]
    StateOutOfRange(u32, u32),
    #[error("expected {expected} row-mean targets, got {got}")]
    TargetCount { expected: usize, got: usize },
    #[error("weight policy {0:?} requires a weight table")]
    MissingTable(WeightPolicy),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How the adversary sizes its RB demands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackStrategy {
    None,
    QLearning,
    MinRes,
    Random,
}

impl AttackStrategy {
    pub fn name(self) -> &'static str {
        match self {
            AttackStrategy::None => "none",
            AttackStrategy::QLearning => "qlearning",
            AttackStrategy::MinRes => "minres",
            AttackStrategy::Random => "random",
        }
    }
}

impl std::str::FromStr for AttackStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(AttackStrategy::None),
            "qlearning" => Ok(AttackStrategy::QLearning),
            "minres" => Ok(AttackStrategy::MinRes),
            "random" => Ok(AttackStrategy::Random),
            other => Err(format!("unknown attack strategy '{other}'")),
        }
    }
}

/// How fake requests pick their advertised weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum WeightPolicy {
    Lw,
    Uw,
    Ulw,
    Rdw,
    Rdlw,
    Aw1,
    Aw2,
    Aw3,
}

pub const ALL_WEIGHT_POLICIES: [WeightPolicy; 8] = [
    WeightPolicy::Lw,
    WeightPolicy::Uw,
    WeightPolicy::Ulw,
    WeightPolicy::Rdw,
    WeightPolicy::Rdlw,
    WeightPolicy::Aw1,
    WeightPolicy::Aw2,
    WeightPolicy::Aw3,
];

impl WeightPolicy {
    pub fn name(self) -> &'static str {
        match self {
            WeightPolicy::Lw => "LW",
            WeightPolicy::Uw => "UW",
            WeightPolicy::Ulw => "ULW",
            WeightPolicy::Rdw => "RDW",
            WeightPolicy::Rdlw => "RDLW",
            WeightPolicy::Aw1 => "AW1",
            WeightPolicy::Aw2 => "AW2",
            WeightPolicy::Aw3 => "AW3",
        }
    }
}

impl std::str::FromStr for WeightPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_WEIGHT_POLICIES
            .iter()
            .find(|p| p.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown weight policy '{s}'"))
    }
}

/// What the adversary's Q-learning reward counts: how many of its requests
/// got served, their advertised weight, or the RBs they captured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackerRewardMode {
    Count,
    Weight,
    Resource,
}

/// Spectrum-sensing error rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SensingErrorConfig {
    /// Probability a free RB is sensed busy.
    pub false_alarm: f64,
    /// Probability a busy RB is sensed free.
    pub misdetection: f64,
}

/// Everything configurable about the adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    pub strategy: AttackStrategy,
    /// Target fake-request emission rate per slot, capped at one per slot.
    pub fake_rate: f64,
    pub weight_policy: WeightPolicy,
    /// AW3's probability of stepping the weight down after a miss.
    pub aw3_decrease_prob: f64,
    pub reward_mode: AttackerRewardMode,
    pub sensing: SensingErrorConfig,
    /// Override for the RDW/RDLW distribution; rows are weights 1..W,
    /// columns remaining-RB states 1..F.
    pub weight_table: Option<WeightTable>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            strategy: AttackStrategy::QLearning,
            fake_rate: 0.5,
            weight_policy: WeightPolicy::Lw,
            aw3_decrease_prob: 0.4,
            reward_mode: AttackerRewardMode::Resource,
            sensing: SensingErrorConfig::default(),
            weight_table: None,
        }
    }
}

/// Weight distribution conditioned on remaining free RBs. `rows[j][i]` is the
/// probability of weight `j+1` when `i+1` RBs remain.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightTable {
    rows: Vec<Vec<f64>>,
}

impl<'de> serde::Deserialize<'de> for WeightTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        WeightTable::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

impl WeightTable {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, AttackError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(AttackError::MalformedTable);
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width)
            || rows.iter().flatten().any(|p| !p.is_finite() || *p < 0.0)
        {
            return Err(AttackError::MalformedTable);
        }
        Ok(WeightTable { rows })
    }

    /// Number of weight levels (rows).
    pub fn weights(&self) -> usize {
        self.rows.len()
    }

    /// Number of remaining-RB states (columns).
    pub fn states(&self) -> usize {
        self.rows[0].len()
    }

    /// P(weight | state), both 1-based.
    pub fn prob(&self, weight: u32, state: u32) -> f64 {
        self.rows[(weight - 1) as usize][(state - 1) as usize]
    }

    /// Parses a whitespace-separated matrix, one weight level per line.
    pub fn from_text(text: &str) -> Result<Self, AttackError> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            match row {
                Ok(r) => rows.push(r),
                Err(e) => {
                    return Err(AttackError::TableParse(format!(
                        "line {}: {e}",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_rows(rows)
    }

    /// Mean probability of each weight level across all RB states.
    pub fn row_means(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().sum::<f64>() / r.len() as f64)
            .collect()
    }

    /// True iff every column is a probability distribution and every row's
    /// mean across states hits its target, all within `TABLE_TOLERANCE`.
    pub fn validate(&self, row_mean_targets: &[f64]) -> Result<bool, AttackError> {
        if row_mean_targets.len() != self.weights() {
            return Err(AttackError::TargetCount {
                expected: self.weights(),
                got: row_mean_targets.len(),
            });
        }
        for i in 0..self.states() {
            let col: f64 = self.rows.iter().map(|r| r[i]).sum();
            if (col - 1.0).abs() > TABLE_TOLERANCE {
                return Ok(false);
            }
        }
        for (row, target) in self.rows.iter().zip(row_mean_targets) {
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            if (mean - target).abs() > TABLE_TOLERANCE {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Draws a weight (1-based) from the column for `state` remaining RBs.
    pub fn sample_weight(&self, state: u32, rng: &mut impl Rng) -> Result<u32, AttackError> {
        if state < 1 || state as usize > self.states() {
            return Err(AttackError::StateOutOfRange(state, self.states() as u32));
        }
        let r: f64 = rng.gen();
        let mut cum = 0.0;
        let mut last_nonzero = 1;
        for w in 1..=self.weights() as u32 {
            let p = self.prob(w, state);
            if p > 0.0 {
                last_nonzero = w;
                cum += p;
                if r < cum {
                    return Ok(w);
                }
            }
        }
        // Float dust can leave r just past the accumulated mass.
        Ok(last_nonzero)
    }
}

/// Weight distribution spreading fake weights over the whole range, shifted
/// upward as RBs get scarce (columns: states 1..11, rows: weights 1..5).
pub fn rdw_table() -> WeightTable {
    WeightTable::from_rows(vec![
        vec![0.5, 0.5, 0.4, 0.4, 0.2, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.4, 0.4, 0.4, 0.4, 0.3, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0],
        vec![0.1, 0.1, 0.2, 0.2, 0.4, 0.2, 0.4, 0.2, 0.2, 0.1, 0.1],
        vec![0.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.3, 0.4, 0.4, 0.4, 0.4],
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.2, 0.2, 0.4, 0.4, 0.5, 0.5],
    ])
    .expect("embedded table is well-formed")
}

/// Like RDW but concentrated on the top two weights.
pub fn rdlw_table() -> WeightTable {
    WeightTable::from_rows(vec![
        vec![0.0; 11],
        vec![0.0; 11],
        vec![0.0; 11],
        vec![1.0, 0.9, 0.9, 0.8, 0.8, 0.5, 0.2, 0.2, 0.1, 0.1, 0.0],
        vec![0.0, 0.1, 0.1, 0.2, 0.2, 0.5, 0.8, 0.8, 0.9, 0.9, 1.0],
    ])
    .expect("embedded table is well-formed")
}

/// Row-mean targets the embedded tables must satisfy.
pub fn rdw_targets(weights: usize) -> Vec<f64> {
    vec![1.0 / weights as f64; weights]
}

pub fn rdlw_targets() -> Vec<f64> {
    vec![0.0, 0.0, 0.0, 0.5, 0.5]
}

/// Keeps the long-run emission rate at or below the configured fake rate.
#[derive(Debug, Clone, Default)]
pub struct RateLimiter {
    emitted: u64,
    elapsed: u64,
}

impl RateLimiter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Marks the start of a new slot.
    pub fn tick(&mut self) {
        self.elapsed += 1;
    }

    /// Emit only while the realized rate sits below the target.
    pub fn should_emit(&self, fake_rate: f64) -> bool {
        debug_assert!(self.elapsed >= 1, "tick before asking");
        (self.emitted as f64) < fake_rate * self.elapsed as f64
    }

    pub fn note_emitted(&mut self) {
        self.emitted += 1;
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn elapsed(&self) -> u64 {
        self.elapsed
    }
}

/// Counts RBs the adversary senses as free. Each genuinely free RB is missed
/// with the false-alarm probability; each busy RB leaks in with the
/// misdetection probability. Perfect sensing consumes no randomness.
pub fn observe_free_rbs(
    occupied: &[bool],
    sensing: &SensingErrorConfig,
    rng: &mut impl Rng,
) -> u32 {
    if sensing.false_alarm == 0.0 && sensing.misdetection == 0.0 {
        return occupied.iter().filter(|&&busy| !busy).count() as u32;
    }
    let mut free = 0;
    for &busy in occupied {
        let seen_free = if busy {
            rng.gen_bool(sensing.misdetection)
        } else {
            !rng.gen_bool(sensing.false_alarm)
        };
        if seen_free {
            free += 1;
        }
    }
    free
}

fn state_key(observed_free: u32) -> StateKey {
    StateKey(observed_free as u64)
}

/// What serving one emission of `demand` RBs pays under `mode`.
pub fn per_serve_reward(mode: AttackerRewardMode, top_weight: u32, demand: u32) -> f64 {
    match mode {
        AttackerRewardMode::Count => 1.0,
        AttackerRewardMode::Weight => top_weight as f64,
        AttackerRewardMode::Resource => demand as f64,
    }
}

/// Attacker Q-table over observed-free-RB states 0..=total. Action 0 (emit
/// nothing) starts at 0; every emitting action starts at the discounted
/// value of that demand being served forever. A serve then backs up to
/// exactly the starting value, so success leaves an estimate parked where it
/// began and failures are the only moves that sink it: an early lucky serve
/// at a small demand cannot outbid untried larger ones.
pub fn init_attacker_table(
    total_rbs: u32,
    mode: AttackerRewardMode,
    top_weight: u32,
    gamma: f64,
) -> QTable {
    let horizon = 1.0 / (1.0 - gamma).max(1e-6);
    let mut table = QTable::new();
    for state in 0..=total_rbs {
        table.ensure_state(state_key(state), state as usize + 1);
        for action in 1..=state {
            table.set(
                state_key(state),
                action as usize,
                per_serve_reward(mode, top_weight, action) * horizon,
            );
        }
    }
    table
}

/// Epsilon-greedy RB demand for the observed state; 0 means stay silent.
/// Unlike the scheduler, the adversary breaks value ties toward the larger
/// demand: grabbing everything it senses is the most harmful of equally
/// promising moves, and it backs off only once over-grabbing stops paying.
pub fn choose_rb_demand(
    table: &QTable,
    observed_free: u32,
    epsilon: f64,
    rng: &mut impl Rng,
) -> u32 {
    let key = state_key(observed_free);
    let n = observed_free as usize + 1;
    if rng.gen::<f64>() < epsilon {
        return rng.gen_range(0..n) as u32;
    }
    let mut best = 0;
    for a in 1..n {
        if table.get(key, a) >= table.get(key, best) {
            best = a;
        }
    }
    best as u32
}

/// Mutable state for the adaptive-weight policies.
#[derive(Debug, Clone)]
pub struct AwState {
    pub current: u32,
}

impl AwState {
    /// Adaptive policies start at the top weight, like the plain LW attack.
    pub fn new(weight_range: [u32; 2]) -> Self {
        AwState {
            current: weight_range[1],
        }
    }
}

/// Applies one adaptive-weight step after a slot in which the adversary
/// emitted; `was_selected` says whether any fake request got served that
/// slot.
pub fn update_aw(
    policy: WeightPolicy,
    aw: &mut AwState,
    was_selected: bool,
    aw3_decrease_prob: f64,
    weight_range: [u32; 2],
    rng: &mut impl Rng,
) {
    let [lo, hi] = weight_range;
    aw.current = match policy {
        WeightPolicy::Aw1 => {
            if was_selected {
                (aw.current + 1).min(hi)
            } else {
                aw.current.saturating_sub(1).max(lo)
            }
        }
        WeightPolicy::Aw2 => {
            if was_selected {
                hi
            } else {
                aw.current.saturating_sub(1).max(lo)
            }
        }
        WeightPolicy::Aw3 => {
            if was_selected {
                hi
            } else if rng.gen_bool(aw3_decrease_prob) {
                aw.current.saturating_sub(1).max(lo)
            } else {
                aw.current
            }
        }
        _ => aw.current,
    };
}

/// Weight a fake request advertises, given the observed remaining RBs.
pub fn weight_from_policy(
    policy: WeightPolicy,
    observed_free: u32,
    aw: &AwState,
    table: Option<&WeightTable>,
    weight_range: [u32; 2],
    rng: &mut impl Rng,
) -> Result<u32, AttackError> {
    let [lo, hi] = weight_range;
    match policy {
        WeightPolicy::Lw => Ok(hi),
        WeightPolicy::Uw => Ok(rng.gen_range(lo..=hi)),
        WeightPolicy::Ulw => Ok(rng.gen_range((hi - 1).max(lo)..=hi)),
        WeightPolicy::Rdw | WeightPolicy::Rdlw => table
            .ok_or(AttackError::MissingTable(policy))?
            .sample_weight(observed_free, rng),
        WeightPolicy::Aw1 | WeightPolicy::Aw2 | WeightPolicy::Aw3 => Ok(aw.current),
    }
}

/// Builds this slot's fake request, or nothing if the strategy stays silent.
/// Returns the request together with the RB demand it encodes. The demand is
/// folded into `min_rate` so that admission maths charges exactly `k` RBs;
/// processing and power demands sit at the legitimate minimum.
#[allow(clippy::too_many_arguments)]
pub fn craft_fake_request(
    attack: &AttackConfig,
    traffic: &TrafficConfig,
    link: &LinkParams,
    weight_table: Option<&WeightTable>,
    table: Option<&QTable>,
    aw: &AwState,
    slot: u64,
    observed_free: u32,
    epsilon: f64,
    ids: &mut RequestIdGen,
    rng: &mut impl Rng,
) -> Result<Option<(Request, u32)>, AttackError> {
    if observed_free == 0 {
        return Ok(None);
    }
    let k = match attack.strategy {
        AttackStrategy::None => return Ok(None),
        AttackStrategy::QLearning => choose_rb_demand(
            table.expect("qlearning attacker carries a table"),
            observed_free,
            epsilon,
            rng,
        ),
        AttackStrategy::MinRes => 1,
        // Blind guessing over the whole band: this baseline deliberately
        // ignores the sensing report, so oversized draws age out unserved.
        AttackStrategy::Random => rng.gen_range(1..=link.rb_count),
    };
    if k == 0 {
        return Ok(None);
    }
    let weight = weight_from_policy(
        attack.weight_policy,
        observed_free,
        aw,
        weight_table,
        traffic.weight_range,
        rng,
    )?;
    let lifetime = rng.gen_range(traffic.lifetime_range[0]..=traffic.lifetime_range[1]);
    let offset = rng.gen_range(traffic.deadline_offset_range[0]..=traffic.deadline_offset_range[1]);
    let snr = rng.gen_range(traffic.snr_range[0]..=traffic.snr_range[1]);
    let ber = ber_from_snr(snr).expect("snr range is positive");
    let request = Request {
        id: ids.fresh(),
        origin: Origin::Adversary,
        weight,
        min_rate: link.achievable_rate(k, ber),
        min_processing: PowerShare::from_fraction(traffic.processing_range[0])?,
        min_comm_power: PowerShare::from_fraction(traffic.comm_power_range[0])?,
        snr,
        lifetime,
        arrival_slot: slot,
        deadline_slot: slot + offset,
    };
    Ok(Some((request, k)))
}

/// Reward the adversary books for the fakes served in one slot, given their
/// (advertised weight, granted RBs) pairs.
pub fn fake_reward(served_fakes: &[(u32, u32)], mode: AttackerRewardMode) -> f64 {
    match mode {
        AttackerRewardMode::Count => served_fakes.len() as f64,
        AttackerRewardMode::Weight => served_fakes.iter().map(|&(w, _)| w as f64).sum(),
        AttackerRewardMode::Resource => served_fakes.iter().map(|&(_, rbs)| rbs as f64).sum(),
    }
}

/// Backs up the recorded (state, demand) pair once the emission slot's
/// outcome and the next observation are known.
pub fn attacker_feedback(
    served_fakes: &[(u32, u32)],
    mode: AttackerRewardMode,
    table: &mut QTable,
    prev_state: u32,
    action: u32,
    new_state: u32,
    hp: &QHyperparams,
) {
    let reward = fake_reward(served_fakes, mode);
    table.update(
        state_key(prev_state),
        action as usize,
        reward,
        state_key(new_state),
        hp,
    );
}
