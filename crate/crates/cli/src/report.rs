//! Run reports and their on-disk layout.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::table::Table;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub table: Table,
    pub aggregates: Value,
    pub threads: usize,
    pub started_at: chrono::DateTime<chrono::Utc>,
    pub wall_clock_s: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    tool: &'static str,
    version: &'static str,
    scenario: &'a str,
    seed: u64,
    trials: usize,
    threads: usize,
    rows: usize,
    started_at: String,
    wall_clock_s: f64,
    aggregates: &'a Value,
}

impl RunReport {
    pub fn summary_json(&self) -> Result<String> {
        let s = Summary {
            tool: "ddest",
            version: TOOL_VERSION,
            scenario: &self.config.scenario,
            seed: self.config.seed,
            trials: self.config.trials,
            threads: self.threads,
            rows: self.table.len(),
            started_at: self.started_at.to_rfc3339(),
            wall_clock_s: self.wall_clock_s,
            aggregates: &self.aggregates,
        };
        Ok(serde_json::to_string_pretty(&s)?)
    }

    /// Write `<root>/<scenario>/<timestamp>/{results.csv, summary.json, config.toml}`.
    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let base = root.join(&self.config.scenario);
        let stamp = self.started_at.format("%Y%m%dT%H%M%SZ").to_string();
        let mut dir = base.join(&stamp);
        let mut k = 1;
        while dir.exists() {
            dir = base.join(format!("{stamp}-{k}"));
            k += 1;
        }
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let write = |name: &str, body: String| -> Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))
        };
        write("results.csv", self.table.to_csv()?)?;
        write("summary.json", self.summary_json()?)?;
        write("config.toml", self.config.to_toml()?)?;
        Ok(dir)
    }
}
