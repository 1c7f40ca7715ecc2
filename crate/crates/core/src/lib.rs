//! Discrete-slot simulator of network-slicing admission control at a single
//! gNodeB, with an adversary that floods the cell with fake slice requests to
//! starve legitimate users.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] — requests, link rates, and the exactly-conserved resource pool
//! * [`rl`] — tabular Q-learning shared by the scheduler and the attacker
//! * [`traffic`] — legitimate arrival generation
//! * [`schemes`] — admission schemes (Q-learning, myopic, FCFS, random)
//! * [`attacker`] — fake-request crafting, sensing, rate limiting, weights
//! * [`engine`] — the slot loop tying it all together
//! * [`sweep`] — parallel parameter sweeps with paired no-attack references

pub mod attacker;
pub mod engine;
pub mod model;
pub mod rl;
pub mod schemes;
pub mod sweep;
pub mod traffic;

pub use attacker::{AttackConfig, AttackStrategy, AttackerRewardMode, WeightPolicy, WeightTable};
pub use engine::{compute_ratio, run, run_with_log, MetricsReport, SimConfig, SimError, Simulation};
pub use model::{LinkParams, Request, ResourcePool, DEFAULT_C};
pub use rl::{QHyperparams, QTable};
pub use schemes::SchemeKind;
pub use sweep::{
    apply_axis, median_ratio, median_real_reward, median_total_reward, parse_axis_value,
    run_sweep, run_sweep_with_jobs, write_csv, AxisValue, ResultRow, SnrBand, SweepAxis,
    SweepSpec,
};
pub use traffic::TrafficConfig;
