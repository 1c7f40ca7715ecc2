//! Command-line front end: single runs, axis sweeps, weight-table checks,
//! and canned experiment grids.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use slicesim::attacker::{rdlw_table, rdlw_targets, rdw_table, rdw_targets, WeightTable};
use slicesim::sweep::{
    median_ratio, median_real_reward, parse_axis_value, run_sweep_with_jobs, write_csv,
    AxisValue, SweepAxis, SweepSpec,
};
use slicesim::{run, run_with_log, MetricsReport, SimConfig};

#[derive(Parser)]
#[command(
    name = "slicesim",
    version,
    about = "Network-slicing admission simulator with a fake-request flooding adversary"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a JSON config and print its metrics
    Run {
        /// JSON file mirroring the SimConfig fields (all optional)
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Write the metrics report as JSON
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a line-delimited event trace
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Cross one axis' values with a list of seeds and emit CSV
    Sweep {
        /// Base JSON config; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// fake-rate, rb-count, ue-count, snr-band, sensing-error,
        /// weight-policy, scheme or attack-strategy
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values, e.g. 0,0.1,0.5 or low,medium,high
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Comma-separated seeds
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        /// CSV destination; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = one per core)
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Check weight tables: columns must be distributions, row means must
    /// hit their targets
    ValidateDist {
        /// Plain-text matrix (one weight level per line) to check instead of
        /// the embedded tables
        #[arg(long)]
        table: Option<PathBuf>,
        /// Expected row means for --table; defaults to the table's own means
        /// (checking only column sums)
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<f64>>,
    },
    /// Run a canned experiment grid and write its CSV
    Replicate {
        /// 1 attack strategies, 2 schemes, 3 fake rate, 4 RB count,
        /// 5 UE count, 6 SNR band, 9 weight policies
        #[arg(long)]
        table: u32,
        /// CSV destination
        #[arg(long)]
        out: PathBuf,
        /// Seeds per grid point
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5])]
        seeds: Vec<u64>,
        /// Override the run length
        #[arg(long)]
        slots: Option<u64>,
        /// Override the measurement window
        #[arg(long)]
        window: Option<u64>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Run {
            config,
            seed,
            out,
            log,
        } => cmd_run(&config, seed, out.as_deref(), log.as_deref()),
        Command::Sweep {
            config,
            axis,
            values,
            seeds,
            out,
            jobs,
        } => cmd_sweep(config.as_deref(), &axis, &values, seeds, out.as_deref(), jobs),
        Command::ValidateDist { table, targets } => cmd_validate(table.as_deref(), targets),
        Command::Replicate {
            table,
            out,
            seeds,
            slots,
            window,
        } => cmd_replicate(table, &out, seeds, slots, window),
    }
}

fn load_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: SimConfig = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(config: &Path, seed: Option<u64>, out: Option<&Path>, log: Option<&Path>) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = match log {
        Some(path) => {
            let mut file = fs::File::create(path)
                .with_context(|| format!("cannot create log {}", path.display()))?;
            let report = run_with_log(&cfg, &mut file)?;
            file.flush()?;
            report
        }
        None => run(&cfg)?,
    };
    print_report(&cfg, &report);
    if let Some(path) = out {
        let json = serde_json::to_vec_pretty(&report)?;
        fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn print_report(cfg: &SimConfig, r: &MetricsReport) {
    println!("seed                 {}", cfg.seed);
    println!(
        "slots                {} (window {})",
        cfg.total_slots, cfg.measure_window
    );
    println!("scheme               {}", cfg.scheme.name());
    println!(
        "attack               {} (rate {}, weights {})",
        cfg.attack.strategy.name(),
        cfg.attack.fake_rate,
        cfg.attack.weight_policy.name()
    );
    println!("total reward         {}", r.total_reward);
    println!("real reward          {}", r.real_reward);
    println!("fake reward          {}", r.fake_reward);
    println!("requested real       {}", r.requested_real_reward);
    println!("requested fake       {}", r.requested_fake_reward);
    println!("fake weight counts   {:?}", r.fake_weight_histogram);
}

fn cmd_sweep(
    config: Option<&Path>,
    axis: &str,
    values: &[String],
    seeds: Vec<u64>,
    out: Option<&Path>,
    jobs: usize,
) -> Result<()> {
    let base = match config {
        Some(path) => load_config(path)?,
        None => SimConfig::default(),
    };
    let spec = build_spec(base, axis, values, seeds)?;
    let rows = run_sweep_with_jobs(&spec, jobs)?;
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            fs::write(path, buf).with_context(|| format!("cannot write {}", path.display()))?;
            eprintln!("{} rows -> {}", rows.len(), path.display());
        }
        None => write_csv(&rows, &mut std::io::stdout().lock())?,
    }
    Ok(())
}

fn build_spec(base: SimConfig, axis: &str, values: &[String], seeds: Vec<u64>) -> Result<SweepSpec> {
    let axis: SweepAxis = axis.parse().map_err(anyhow::Error::msg)?;
    if values.is_empty() {
        bail!("values: need at least one");
    }
    if seeds.is_empty() {
        bail!("seeds: need at least one");
    }
    let values: Vec<AxisValue> = values
        .iter()
        .map(|v| parse_axis_value(axis, v).map_err(anyhow::Error::msg))
        .collect::<Result<_>>()?;
    Ok(SweepSpec {
        axis,
        values,
        seeds,
        base,
    })
}

fn cmd_validate(table: Option<&Path>, targets: Option<Vec<f64>>) -> Result<()> {
    let mut all_ok = true;
    match table {
        None => {
            let rdw = rdw_table();
            all_ok &= report_table("RDW", &rdw, &rdw_targets(rdw.weights()))?;
            all_ok &= report_table("RDLW", &rdlw_table(), &rdlw_targets())?;
        }
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read table {}", path.display()))?;
            let table = WeightTable::from_text(&text)?;
            let targets = targets.unwrap_or_else(|| table.row_means());
            all_ok &= report_table(&path.display().to_string(), &table, &targets)?;
        }
    }
    if !all_ok {
        bail!("weight table validation failed");
    }
    Ok(())
}

fn report_table(name: &str, table: &WeightTable, targets: &[f64]) -> Result<bool> {
    let ok = table.validate(targets)?;
    println!(
        "{name}: {} ({} weights x {} states, row means {:?})",
        if ok { "pass" } else { "fail" },
        table.weights(),
        table.states(),
        table.row_means()
    );
    Ok(ok)
}

fn cmd_replicate(
    table: u32,
    out: &Path,
    seeds: Vec<u64>,
    slots: Option<u64>,
    window: Option<u64>,
) -> Result<()> {
    let (axis, values) = preset(table)?;
    let mut base = SimConfig::default();
    if let Some(s) = slots {
        base.total_slots = s;
    }
    if let Some(w) = window {
        base.measure_window = w;
    }
    let spec = build_spec(base, axis.name(), &values, seeds)?;
    let rows = run_sweep_with_jobs(&spec, 0)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    fs::write(out, buf).with_context(|| format!("cannot write {}", out.display()))?;

    println!("{:<16} {:>12} {:>10}", "value", "median_real", "ratio_%");
    for value in &spec.values {
        let real = median_real_reward(&rows, *value).unwrap_or(f64::NAN);
        let ratio = median_ratio(&rows, *value).unwrap_or(f64::NAN);
        println!("{:<16} {:>12.1} {:>10.2}", value.to_string(), real, ratio);
    }
    Ok(())
}

fn preset(table: u32) -> Result<(SweepAxis, Vec<String>)> {
    let strs = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    Ok(match table {
        1 => (
            SweepAxis::AttackStrategy,
            strs(&["qlearning", "minres", "random", "none"]),
        ),
        2 => (
            SweepAxis::Scheme,
            strs(&["qlearning", "myopic", "fcfs", "random"]),
        ),
        3 => (
            SweepAxis::FakeRate,
            strs(&["0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "1.0"]),
        ),
        4 => (SweepAxis::RbCount, (5..=15).map(|v| v.to_string()).collect()),
        5 => (
            SweepAxis::UeCount,
            [3, 4, 5, 6, 7, 8, 9, 10, 20, 50]
                .iter()
                .map(|v| v.to_string())
                .collect(),
        ),
        6 => (SweepAxis::SnrBand, strs(&["low", "medium", "high"])),
        9 => (
            SweepAxis::WeightPolicy,
            strs(&["LW", "UW", "ULW", "RDW", "RDLW", "AW1", "AW2", "AW3"]),
        ),
        other => bail!("unknown table {other}: choose 1, 2, 3, 4, 5, 6 or 9"),
    })
}
