//! Parameter sweeps: run a grid of (axis value, seed) jobs in parallel, each
//! paired with its own no-attack reference so every row carries the
//! starvation ratio.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::attacker::{AttackStrategy, WeightPolicy};
use crate::engine::{compute_ratio, run, SimConfig};
use crate::schemes::SchemeKind;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("axis {axis} cannot take value {value}")]
    ValueType { axis: SweepAxis, value: AxisValue },
    #[error("job value={value} seed={seed}: {message}")]
    Job {
        value: String,
        seed: u64,
        message: String,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Which knob the sweep turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    FakeRate,
    RbCount,
    UeCount,
    SnrBand,
    SensingError,
    WeightPolicy,
    Scheme,
    AttackStrategy,
}

pub const ALL_AXES: [SweepAxis; 8] = [
    SweepAxis::FakeRate,
    SweepAxis::RbCount,
    SweepAxis::UeCount,
    SweepAxis::SnrBand,
    SweepAxis::SensingError,
    SweepAxis::WeightPolicy,
    SweepAxis::Scheme,
    SweepAxis::AttackStrategy,
];

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::FakeRate => "fake-rate",
            SweepAxis::RbCount => "rb-count",
            SweepAxis::UeCount => "ue-count",
            SweepAxis::SnrBand => "snr-band",
            SweepAxis::SensingError => "sensing-error",
            SweepAxis::WeightPolicy => "weight-policy",
            SweepAxis::Scheme => "scheme",
            SweepAxis::AttackStrategy => "attack-strategy",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let canon = s.replace('_', "-");
        ALL_AXES
            .into_iter()
            .find(|a| a.name() == canon)
            .ok_or_else(|| {
                let names: Vec<_> = ALL_AXES.iter().map(|a| a.name()).collect();
                format!("unknown axis '{s}' (expected one of {})", names.join(", "))
            })
    }
}

/// Named SNR operating bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrBand {
    Low,
    Medium,
    High,
}

impl SnrBand {
    pub fn range(self) -> [f64; 2] {
        match self {
            SnrBand::Low => [0.5, 1.5],
            SnrBand::Medium => [1.5, 3.0],
            SnrBand::High => [3.0, 6.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SnrBand::Low => "low",
            SnrBand::Medium => "medium",
            SnrBand::High => "high",
        }
    }
}

impl fmt::Display for SnrBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SnrBand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(SnrBand::Low),
            "medium" => Ok(SnrBand::Medium),
            "high" => Ok(SnrBand::High),
            other => Err(format!(
                "unknown SNR band '{other}' (expected low, medium or high)"
            )),
        }
    }
}

/// One point along a sweep axis. Some axes take numbers, others names; use
/// [`parse_axis_value`] to parse user input in the context of its axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    Int(u32),
    Float(f64),
    Band(SnrBand),
    Policy(WeightPolicy),
    Scheme(SchemeKind),
    Strategy(AttackStrategy),
}

impl AxisValue {
    fn as_f64(self) -> Option<f64> {
        match self {
            AxisValue::Int(v) => Some(v as f64),
            AxisValue::Float(v) => Some(v),
            _ => None,
        }
    }

    fn as_u32(self) -> Option<u32> {
        match self {
            AxisValue::Int(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Int(v) => write!(f, "{v}"),
            AxisValue::Float(v) => write!(f, "{v}"),
            AxisValue::Band(b) => f.write_str(b.name()),
            AxisValue::Policy(p) => f.write_str(p.name()),
            AxisValue::Scheme(s) => f.write_str(s.name()),
            AxisValue::Strategy(s) => f.write_str(s.name()),
        }
    }
}

impl Serialize for AxisValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            AxisValue::Int(v) => s.serialize_u32(*v),
            AxisValue::Float(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// Parses one sweep value in the context of its axis ("random" alone would be
/// ambiguous between a scheme and an attack strategy).
pub fn parse_axis_value(axis: SweepAxis, s: &str) -> Result<AxisValue, String> {
    match axis {
        SweepAxis::FakeRate | SweepAxis::SensingError => s
            .parse::<f64>()
            .map(AxisValue::Float)
            .map_err(|_| format!("axis {axis} needs a number, got '{s}'")),
        SweepAxis::RbCount | SweepAxis::UeCount => s
            .parse::<u32>()
            .map(AxisValue::Int)
            .map_err(|_| format!("axis {axis} needs a non-negative integer, got '{s}'")),
        SweepAxis::SnrBand => s.parse::<SnrBand>().map(AxisValue::Band),
        SweepAxis::WeightPolicy => s.parse::<WeightPolicy>().map(AxisValue::Policy),
        SweepAxis::Scheme => s.parse::<SchemeKind>().map(AxisValue::Scheme),
        SweepAxis::AttackStrategy => s.parse::<AttackStrategy>().map(AxisValue::Strategy),
    }
}

/// Overwrites the swept field of a base configuration.
pub fn apply_axis(
    base: &SimConfig,
    axis: SweepAxis,
    value: AxisValue,
) -> Result<SimConfig, SweepError> {
    let bad = || SweepError::ValueType { axis, value };
    let mut cfg = base.clone();
    match axis {
        SweepAxis::FakeRate => cfg.attack.fake_rate = value.as_f64().ok_or_else(bad)?,
        SweepAxis::RbCount => cfg.link.rb_count = value.as_u32().ok_or_else(bad)?,
        SweepAxis::UeCount => cfg.traffic.ue_count = value.as_u32().ok_or_else(bad)?,
        SweepAxis::SnrBand => match value {
            AxisValue::Band(band) => {
                cfg.traffic.snr_range = band.range();
                cfg.link.snr_range = band.range();
            }
            _ => return Err(bad()),
        },
        SweepAxis::SensingError => {
            let p = value.as_f64().ok_or_else(bad)?;
            cfg.attack.sensing.false_alarm = p;
            cfg.attack.sensing.misdetection = p;
        }
        SweepAxis::WeightPolicy => match value {
            AxisValue::Policy(p) => cfg.attack.weight_policy = p,
            _ => return Err(bad()),
        },
        SweepAxis::Scheme => match value {
            AxisValue::Scheme(s) => cfg.scheme = s,
            _ => return Err(bad()),
        },
        SweepAxis::AttackStrategy => match value {
            AxisValue::Strategy(s) => cfg.attack.strategy = s,
            _ => return Err(bad()),
        },
    }
    Ok(cfg)
}

/// A grid of runs: every value in `values` crossed with every seed.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<AxisValue>,
    pub seeds: Vec<u64>,
    pub base: SimConfig,
}

/// One completed job of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub axis: SweepAxis,
    pub value: AxisValue,
    pub seed: u64,
    pub total_reward: u64,
    pub real_reward: u64,
    pub fake_reward: u64,
    /// Real users' reward as a percentage of the paired no-attack total.
    pub ratio_percent: f64,
    pub wall_clock_s: f64,
}

/// Runs the whole grid on the global thread pool. Rows come back in
/// deterministic order: values in the order given, seeds nested inside.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>, SweepError> {
    let mut jobs = Vec::new();
    for &value in &spec.values {
        for &seed in &spec.seeds {
            jobs.push((value, seed));
        }
    }
    jobs.par_iter()
        .map(|&(value, seed)| {
            run_job(spec, value, seed).map_err(|e| SweepError::Job {
                value: value.to_string(),
                seed,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Like [`run_sweep`] but on a private pool of `jobs` threads (0 = default).
pub fn run_sweep_with_jobs(spec: &SweepSpec, jobs: usize) -> Result<Vec<ResultRow>, SweepError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SweepError::ThreadPool(e.to_string()))?;
    pool.install(|| run_sweep(spec))
}

fn run_job(
    spec: &SweepSpec,
    value: AxisValue,
    seed: u64,
) -> Result<ResultRow, Box<dyn std::error::Error + Send + Sync>> {
    let started = Instant::now();
    let mut cfg = apply_axis(&spec.base, spec.axis, value)?;
    cfg.seed = seed;
    let attacked = run(&cfg)?;

    let mut reference_cfg = cfg.clone();
    reference_cfg.attack.strategy = AttackStrategy::None;
    let reference = run(&reference_cfg)?;
    let ratio = compute_ratio(&attacked, &reference)?;

    Ok(ResultRow {
        axis: spec.axis,
        value,
        seed,
        total_reward: attacked.total_reward,
        real_reward: attacked.real_reward,
        fake_reward: attacked.fake_reward,
        ratio_percent: ratio,
        wall_clock_s: started.elapsed().as_secs_f64(),
    })
}

/// Writes rows as CSV with a fixed header.
pub fn write_csv(rows: &[ResultRow], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "axis,value,seed,total_reward,real_reward,fake_reward,ratio_percent,wall_clock_s"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.4},{:.3}",
            r.axis,
            r.value,
            r.seed,
            r.total_reward,
            r.real_reward,
            r.fake_reward,
            r.ratio_percent,
            r.wall_clock_s
        )?;
    }
    Ok(())
}

/// Median of the real rewards among rows with the given axis value.
pub fn median_real_reward(rows: &[ResultRow], value: AxisValue) -> Option<f64> {
    median(rows.iter().filter(|r| r.value == value).map(|r| r.real_reward as f64))
}

/// Median of the ratio column among rows with the given axis value.
pub fn median_ratio(rows: &[ResultRow], value: AxisValue) -> Option<f64> {
    median(rows.iter().filter(|r| r.value == value).map(|r| r.ratio_percent))
}

/// Median of the total rewards among rows with the given axis value.
pub fn median_total_reward(rows: &[ResultRow], value: AxisValue) -> Option<f64> {
    median(rows.iter().filter(|r| r.value == value).map(|r| r.total_reward as f64))
}

fn median(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("rewards are never NaN"));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}
