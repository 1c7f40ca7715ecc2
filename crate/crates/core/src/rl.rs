//! Tabular Q-learning used by both the gNodeB admission scheme and the
//! adversary. States are opaque integer keys; each state carries its own
//! action-value vector so agents with state-dependent action sets share one
//! table type.

use std::collections::HashMap;
use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Opaque encoded state. Encoders must be injective over the fields they pack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(pub u64);

/// Learning-rate / discount / exploration schedule knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QHyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Slots over which epsilon anneals linearly from start to end.
    pub epsilon_decay_slots: u64,
}

impl Default for QHyperparams {
    fn default() -> Self {
        QHyperparams {
            alpha: 0.1,
            gamma: 0.9,
            epsilon_start: 0.3,
            epsilon_end: 0.05,
            epsilon_decay_slots: 5000,
        }
    }
}

/// Exploration rate at `slot` under a linear anneal.
pub fn epsilon_at(slot: u64, hp: &QHyperparams) -> f64 {
    if hp.epsilon_decay_slots == 0 || slot >= hp.epsilon_decay_slots {
        return hp.epsilon_end;
    }
    let frac = slot as f64 / hp.epsilon_decay_slots as f64;
    hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * frac
}

/// Action-value table. States absent from the table are worth 0 when looked
/// up as successors, matching zero-initialized owners; owners with a custom
/// init (the attacker) pre-populate every state they can visit.
#[derive(Debug, Clone, Default)]
pub struct QTable {
    values: HashMap<u64, Vec<f64>>,
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates `state` with `actions` zero-valued entries if unseen.
    pub fn ensure_state(&mut self, state: StateKey, actions: usize) {
        self.values.entry(state.0).or_insert_with(|| vec![0.0; actions]);
    }

    pub fn set(&mut self, state: StateKey, action: usize, value: f64) {
        let row = self.values.get_mut(&state.0).expect("state not initialized");
        row[action] = value;
    }

    pub fn get(&self, state: StateKey, action: usize) -> f64 {
        self.values
            .get(&state.0)
            .map(|row| row[action])
            .unwrap_or(0.0)
    }

    pub fn action_count(&self, state: StateKey) -> usize {
        self.values.get(&state.0).map(Vec::len).unwrap_or(0)
    }

    pub fn state_count(&self) -> usize {
        self.values.len()
    }

    /// Highest action value at `state`; 0 for unseen states.
    pub fn best_value(&self, state: StateKey) -> f64 {
        self.values
            .get(&state.0)
            .map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            .filter(|v| v.is_finite())
            .unwrap_or(0.0)
    }

    /// Lowest-index argmax at `state`.
    pub fn greedy_action(&self, state: StateKey) -> usize {
        let row = self.values.get(&state.0).expect("state not initialized");
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    /// One Q-learning backup:
    /// Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')).
    pub fn update(
        &mut self,
        state: StateKey,
        action: usize,
        reward: f64,
        next: StateKey,
        hp: &QHyperparams,
    ) {
        let target = reward + hp.gamma * self.best_value(next);
        let row = self.values.get_mut(&state.0).expect("state not initialized");
        row[action] = (1.0 - hp.alpha) * row[action] + hp.alpha * target;
    }

    /// Epsilon-greedy action selection over the state's action set.
    pub fn select_action(&self, state: StateKey, epsilon: f64, rng: &mut impl Rng) -> usize {
        let n = self.action_count(state);
        assert!(n > 0, "select_action on uninitialized state");
        if rng.gen::<f64>() < epsilon {
            rng.gen_range(0..n)
        } else {
            self.greedy_action(state)
        }
    }

    /// Writes `state action value` rows sorted by key, for debugging.
    pub fn dump(&self, out: &mut dyn Write) -> io::Result<()> {
        let mut keys: Vec<u64> = self.values.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            for (a, v) in self.values[&k].iter().enumerate() {
                writeln!(out, "{k} {a} {v}")?;
            }
        }
        Ok(())
    }
}
