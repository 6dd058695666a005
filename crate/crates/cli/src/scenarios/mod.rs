//! Scenario presets and their runners.

mod aliasing;
mod estimation;
mod interference;
mod tracking;

use anyhow::{bail, Result};
use ddest::metrics::{cdf, pairwise_sum, to_db};
use ddest::rng::derive_seed;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ChannelConfig, ExperimentConfig, GridConfig, PilotConfig, SweepConfig, TapConfig};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioInfo {
    pub id: &'static str,
    /// `analytic`, `monte-carlo` or `stream`.
    pub kind: &'static str,
    pub description: &'static str,
}

pub const SCENARIOS: [ScenarioInfo; 7] = [
    ScenarioInfo { id: "isci-vs-bandwidth", kind: "analytic", description: "ISI and ICI power versus bandwidth" },
    ScenarioInfo { id: "isr-vs-spreads", kind: "analytic", description: "ISCI power over delay and Doppler spreads" },
    ScenarioInfo { id: "aliasing-vs-bs", kind: "monte-carlo", description: "interpolation error versus B x S" },
    ScenarioInfo { id: "nmse-cdf", kind: "monte-carlo", description: "NMSE of SFFT interpolation and OFDM block pilots" },
    ScenarioInfo { id: "rate-cdf", kind: "monte-carlo", description: "achievable rate of SFFT interpolation and OFDM block pilots" },
    ScenarioInfo { id: "pipeline-demo", kind: "stream", description: "sliding-window interpolation over a stream" },
    ScenarioInfo { id: "extrapolation-demo", kind: "stream", description: "data-aided extrapolation with periodic re-anchoring" },
];

pub fn list_scenarios() -> &'static [ScenarioInfo] {
    &SCENARIOS
}

fn base(scenario: &str) -> ExperimentConfig {
    ExperimentConfig {
        scenario: scenario.to_string(),
        trials: 200,
        seed: 1,
        snr_db: vec![15.0],
        out: None,
        grid: GridConfig { matched: false, subcarrier_spacing: Some(200e3), symbol_duration: None, n: 64, m: 64 },
        channel: ChannelConfig {
            delay_spread: 1e-6,
            doppler_spread: None,
            speed: Some(90.0),
            carrier_frequency: Some(30e9),
            paths: 20,
        },
        pilots: PilotConfig { l_n: 8, l_m: 4, ofdm_block_len: Some(32), restart_every: None },
        taps: TapConfig { max_dn: 2, max_dm: 50 },
        sweep: SweepConfig::default(),
    }
}

/// Preset configuration; `full` selects the large-scale variant.
pub fn preset(id: &str, full: bool) -> Result<ExperimentConfig> {
    let mut c = base(id);
    match id {
        "isci-vs-bandwidth" => {
            c.trials = 20;
            c.grid = GridConfig { matched: true, subcarrier_spacing: None, symbol_duration: None, n: 64, m: 64 };
            c.channel.speed = None;
            c.channel.carrier_frequency = None;
            c.channel.doppler_spread = Some(20e3);
            c.sweep.bandwidths_hz = (1..=15).map(|b| b as f64 * 1e6).collect();
            c.sweep.quadrature_points = Some(if full { 128 } else { 64 });
        }
        "isr-vs-spreads" => {
            c.trials = 10;
            c.grid = GridConfig { matched: true, subcarrier_spacing: None, symbol_duration: None, n: 64, m: 64 };
            c.channel.speed = None;
            c.channel.carrier_frequency = None;
            c.channel.doppler_spread = None;
            c.sweep.delay_spreads_s = (1..=10).map(|k| k as f64 * 0.1e-6).collect();
            c.sweep.doppler_spreads_hz = (1..=9).map(|k| k as f64 * 2e3).collect();
            c.sweep.quadrature_points = Some(if full { 128 } else { 64 });
        }
        "aliasing-vs-bs" => {
            c.trials = 100;
            c.snr_db = vec![f64::INFINITY];
            c.channel.speed = None;
            c.channel.carrier_frequency = None;
            c.channel.delay_spread = 0.5e-6;
            c.channel.doppler_spread = Some(20e3);
            c.channel.paths = 10;
            c.pilots = PilotConfig { l_n: 4, l_m: 5, ofdm_block_len: None, restart_every: None };
            c.taps = TapConfig { max_dn: 0, max_dm: 0 };
            c.sweep.grid_sizes = vec![[40, 25], [80, 125], [400, 250]];
            if full {
                c.sweep.grid_sizes.push([1000, 1000]);
            }
        }
        "nmse-cdf" | "rate-cdf" => {
            if id == "rate-cdf" {
                c.snr_db = vec![5.0, 15.0, 25.0];
            }
            c.channel.speed = None;
            c.sweep.speeds_mps = vec![10.0, 90.0];
            if full {
                c.trials = 1000;
                c.grid.n = 200;
                c.grid.m = 50;
                c.pilots = PilotConfig { l_n: 10, l_m: 2, ofdm_block_len: Some(20), restart_every: None };
            }
        }
        "pipeline-demo" => {
            c.trials = 10;
            c.sweep.stream_slots = Some(256);
        }
        "extrapolation-demo" => {
            c.trials = 10;
            c.pilots.restart_every = Some(ddest::estimator::DataAidedTracker::DEFAULT_RESTART);
            c.sweep.stream_slots = Some(192);
        }
        other => bail!("unknown scenario `{other}`; run `ddest list`"),
    }
    c.validate()?;
    Ok(c)
}

/// Table rows plus scenario aggregates.
pub(crate) struct Output {
    pub table: Table,
    pub aggregates: Value,
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Output> {
    match cfg.scenario.as_str() {
        "isci-vs-bandwidth" => interference::isci_vs_bandwidth(cfg),
        "isr-vs-spreads" => interference::isr_vs_spreads(cfg),
        "aliasing-vs-bs" => aliasing::aliasing_vs_bs(cfg),
        "nmse-cdf" => estimation::nmse_cdf(cfg),
        "rate-cdf" => estimation::rate_cdf(cfg),
        "pipeline-demo" => tracking::pipeline_demo(cfg),
        "extrapolation-demo" => tracking::extrapolation_demo(cfg),
        other => bail!("unknown scenario `{other}`; run `ddest list`"),
    }
}

/// Seed of one trial; independent of the swept point so that every point
/// sees the same channel draws.
pub(crate) fn trial_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(seed, trial as u64)
}

pub(crate) mod stream {
    pub const CHANNEL: u64 = 0;
    pub const FRAME: u64 = 1;
    pub const NOISE: u64 = 2;
}

/// Runs `f` for every trial on the current pool; results in trial order.
pub(crate) fn par_trials<T: Send>(trials: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..trials).into_par_iter().map(f).collect()
}

/// dB of the mean of linear values given in dB.
pub(crate) fn mean_db(values_db: &[f64]) -> f64 {
    let lin: Vec<f64> = values_db.iter().map(|v| 10f64.powf(v / 10.0)).collect();
    to_db(pairwise_sum(&lin) / lin.len().max(1) as f64)
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len().max(1) as f64
}

/// Median and 10/90 % quantiles of an empirical distribution.
pub(crate) fn quantiles(values: &[f64]) -> Result<Value> {
    let c = cdf(values)?;
    Ok(json!({ "q10": c.quantile(0.1), "median": c.median(), "q90": c.quantile(0.9) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        assert!(SCENARIOS.len() >= 7);
        for s in list_scenarios() {
            for full in [false, true] {
                let c = preset(s.id, full).unwrap();
                assert_eq!(c.scenario, s.id);
                let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
                assert_eq!(again, c);
            }
        }
        assert!(preset("nope", false).is_err());
    }

    #[test]
    fn preset_ids_are_stable() {
        let ids: Vec<_> = SCENARIOS.iter().map(|s| s.id).collect();
        assert_eq!(
            ids,
            [
                "isci-vs-bandwidth",
                "isr-vs-spreads",
                "aliasing-vs-bs",
                "nmse-cdf",
                "rate-cdf",
                "pipeline-demo",
                "extrapolation-demo"
            ]
        );
    }
}
