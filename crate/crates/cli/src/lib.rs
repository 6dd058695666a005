//! Experiment runner for the `ddest` simulator: scenario presets, TOML
//! configuration, seeded parallel Monte-Carlo execution and CSV/JSON reports.

pub mod config;
pub mod report;
pub mod scenarios;
pub mod table;

use std::time::Instant;

use anyhow::{Context, Result};

pub use config::ExperimentConfig;
pub use report::RunReport;
pub use scenarios::{list_scenarios, preset, ScenarioInfo};

/// Run a scenario on a dedicated pool of `threads` workers (all cores when
/// `None`). Results depend only on the configuration: trials draw from
/// per-trial seed streams and are collected in trial order.
pub fn run_scenario(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<RunReport> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building worker pool")?;
    let started_at = chrono::Utc::now();
    let clock = Instant::now();
    let output = pool.install(|| scenarios::run(cfg))?;
    Ok(RunReport {
        config: cfg.clone(),
        table: output.table,
        aggregates: output.aggregates,
        threads: pool.current_num_threads(),
        started_at,
        wall_clock_s: clock.elapsed().as_secs_f64(),
    })
}
