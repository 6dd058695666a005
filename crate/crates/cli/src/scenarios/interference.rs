use anyhow::{ensure, Result};
use ddest::channel::generate_wssus;
use ddest::metrics::{ensemble_isci_power, isci_power, to_db, FrameAveraging, InterferenceReport};
use ddest::transforms::TFGrid;
use serde_json::{json, Value};

use super::{mean, par_trials, stream, trial_seed, Output};
use crate::config::ExperimentConfig;
use crate::table::Table;

const COLUMNS: [&str; 6] = ["trial", "isi_db", "ici_db", "isci_db", "ensemble_isi_db", "ensemble_ici_db"];

/// Per-trial realization values at one grid, plus the ensemble curve point.
fn point(cfg: &ExperimentConfig, grid: &TFGrid, tau: f64, nu: f64) -> Result<(InterferenceReport, Vec<InterferenceReport>)> {
    let pulse = ExperimentConfig::pulse(grid);
    let taps = cfg.taps(grid.m());
    let ensemble = ensemble_isci_power(tau, nu, &pulse, grid, &taps, cfg.quadrature_points())?;
    let trials = par_trials(cfg.trials, |t| {
        let seed = ddest::rng::derive_seed(trial_seed(cfg.seed, t), stream::CHANNEL);
        let ch = generate_wssus(tau, nu, cfg.channel.paths, seed)?;
        Ok(isci_power(&ch, &pulse, grid, &taps, FrameAveraging::Stationary)?)
    })?;
    Ok((ensemble, trials))
}

fn summary(ensemble: &InterferenceReport, trials: &[InterferenceReport]) -> Value {
    let isi: Vec<f64> = trials.iter().map(|r| r.isi_power).collect();
    let ici: Vec<f64> = trials.iter().map(|r| r.ici_power).collect();
    json!({
        "ensemble_isi_db": ensemble.isi_db(),
        "ensemble_ici_db": ensemble.ici_db(),
        "ensemble_isci_db": ensemble.isci_db(),
        "mean_isi_db": to_db(mean(&isi)),
        "mean_ici_db": to_db(mean(&ici)),
    })
}

fn rows(table: &mut Table, prefix: &[f64], ensemble: &InterferenceReport, trials: &[InterferenceReport]) -> Result<()> {
    for (t, r) in trials.iter().enumerate() {
        let mut row: Vec<_> = prefix.iter().map(|&v| v.into()).collect();
        row.extend([
            t.into(),
            r.isi_db().into(),
            r.ici_db().into(),
            r.isci_db().into(),
            ensemble.isi_db().into(),
            ensemble.ici_db().into(),
        ]);
        table.push(row)?;
    }
    Ok(())
}

pub(super) fn isci_vs_bandwidth(cfg: &ExperimentConfig) -> Result<Output> {
    ensure!(!cfg.sweep.bandwidths_hz.is_empty(), "`sweep.bandwidths_hz` is empty");
    let (tau, nu) = (cfg.channel.delay_spread, cfg.doppler_spread()?);
    let reference = cfg.grid_for(tau, nu, cfg.grid.n, 2)?;
    let mut table = Table::new(&[&["bandwidth_hz", "m"][..], &COLUMNS].concat());
    let mut points = Vec::new();
    for &b in &cfg.sweep.bandwidths_hz {
        let m = ((b / reference.subcarrier_spacing()).round() as usize).max(2);
        let grid = reference.with_dims(cfg.grid.n, m)?;
        let (ensemble, trials) = point(cfg, &grid, tau, nu)?;
        rows(&mut table, &[b, m as f64], &ensemble, &trials)?;
        let mut s = summary(&ensemble, &trials);
        s["bandwidth_hz"] = json!(b);
        s["m"] = json!(m);
        points.push(s);
    }
    Ok(Output {
        table,
        aggregates: json!({
            "symbol_duration_s": reference.symbol_duration(),
            "subcarrier_spacing_hz": reference.subcarrier_spacing(),
            "points": points,
        }),
    })
}

pub(super) fn isr_vs_spreads(cfg: &ExperimentConfig) -> Result<Output> {
    let taus = if cfg.sweep.delay_spreads_s.is_empty() { vec![cfg.channel.delay_spread] } else { cfg.sweep.delay_spreads_s.clone() };
    let nus = if cfg.sweep.doppler_spreads_hz.is_empty() { vec![cfg.doppler_spread()?] } else { cfg.sweep.doppler_spreads_hz.clone() };
    let mut table = Table::new(&[&["delay_spread_s", "doppler_spread_hz", "symbol_duration_s"][..], &COLUMNS].concat());
    let mut points = Vec::new();
    for &tau in &taus {
        for &nu in &nus {
            let grid = cfg.grid_for(tau, nu, cfg.grid.n, cfg.grid.m)?;
            let (ensemble, trials) = point(cfg, &grid, tau, nu)?;
            rows(&mut table, &[tau, nu, grid.symbol_duration()], &ensemble, &trials)?;
            let mut s = summary(&ensemble, &trials);
            s["delay_spread_s"] = json!(tau);
            s["doppler_spread_hz"] = json!(nu);
            points.push(s);
        }
    }
    Ok(Output { table, aggregates: json!({ "points": points }) })
}
