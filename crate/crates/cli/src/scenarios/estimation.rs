use anyhow::{ensure, Context, Result};
use ddest::channel::{channel_matrix, generate_wssus, TapIndex};
use ddest::estimator::{interpolate, ls_pilot_estimate, ofdm_baseline_estimate};
use ddest::metrics::{achievable_rate, isci_power, nmse_db, to_db, FrameAveraging};
use ddest::modem::{build_block_frame, build_frame, transmit, Frame};
use ddest::rng::derive_seed;
use ddest::transforms::TFMatrix;
use serde_json::{json, Value};

use super::{par_trials, quantiles, stream, trial_seed, Output};
use crate::config::{noise_var, ExperimentConfig};
use crate::table::{Cell, Table};

struct Trial {
    otfs_nmse_db: f64,
    ofdm_nmse_db: f64,
    otfs_rate: f64,
    ofdm_rate: f64,
    otfs_sinr_db: f64,
    ofdm_sinr_db: f64,
    isci_db: f64,
}

/// Mean `|Ĥ − H|²` over the data positions of `frame`.
fn data_error(est: &TFMatrix, truth: &TFMatrix, frame: &Frame) -> f64 {
    let (mut acc, mut count) = (0.0, 0usize);
    for (n, m) in frame.data_positions() {
        acc += (est.values()[(n, m)] - truth.values()[(n, m)]).norm_sqr();
        count += 1;
    }
    acc / count.max(1) as f64
}

type Point = (f64, f64, f64, Vec<Trial>);

/// One entry per (speed, SNR): `(speed, ν_D, snr, trials)`.
fn sweep(cfg: &ExperimentConfig) -> Result<Vec<Point>> {
    let speeds = if cfg.sweep.speeds_mps.is_empty() { vec![cfg.channel.speed.unwrap_or(f64::NAN)] } else { cfg.sweep.speeds_mps.clone() };
    let block = cfg.pilots.ofdm_block_len.context("`pilots.ofdm_block_len` is required for the OFDM comparator")?;
    let tau = cfg.channel.delay_spread;
    let mut points = Vec::new();
    for &speed in &speeds {
        let nu = if speed.is_nan() { cfg.doppler_spread()? } else { cfg.doppler_for_speed(speed) };
        let grid = cfg.grid_for(tau, nu, cfg.grid.n, cfg.grid.m)?;
        let pattern = cfg.pattern(&grid)?;
        ensure!(
            (pattern.overhead() - 1.0 / block as f64).abs() < 1e-12,
            "lattice overhead {} differs from OFDM block overhead 1/{block}",
            pattern.overhead()
        );
        let pulse = ExperimentConfig::pulse(&grid);
        let taps = cfg.taps(grid.m());
        for &snr in &cfg.snr_db {
            let sigma2 = noise_var(snr);
            let trials = par_trials(cfg.trials, |t| {
                let s = trial_seed(cfg.seed, t);
                let ch = generate_wssus(tau, nu, cfg.channel.paths, derive_seed(s, stream::CHANNEL))?;
                let truth = channel_matrix(&ch, &pulse, &grid, TapIndex::DESIRED);

                let lattice = build_frame(&grid, &pattern, derive_seed(s, stream::FRAME))?;
                let rx = transmit(&lattice, &ch, &pulse, &taps, sigma2, derive_seed(s, stream::NOISE))?;
                let otfs = interpolate(&ls_pilot_estimate(&rx, &lattice, &pattern)?)?;

                let blocks = build_block_frame(&grid, block, derive_seed(s, stream::FRAME))?;
                let rxb = transmit(&blocks, &ch, &pulse, &taps, sigma2, derive_seed(s, stream::NOISE))?;
                let ofdm = ofdm_baseline_estimate(&rxb, &blocks, block)?;

                let isci = isci_power(&ch, &pulse, &grid, &taps, FrameAveraging::ZeroFillEdges)?;
                let signal = isci.desired_power;
                let interference = isci.isci_power * signal;
                let r_otfs = achievable_rate(signal, interference, sigma2, data_error(&otfs.h, &truth, &lattice), lattice.pilot_fraction())?;
                let r_ofdm = achievable_rate(signal, interference, sigma2, data_error(&ofdm.h, &truth, &blocks), blocks.pilot_fraction())?;
                Ok(Trial {
                    otfs_nmse_db: nmse_db(&otfs.h, &truth)?,
                    ofdm_nmse_db: nmse_db(&ofdm.h, &truth)?,
                    otfs_rate: r_otfs.rate,
                    ofdm_rate: r_ofdm.rate,
                    otfs_sinr_db: to_db(r_otfs.sinr),
                    ofdm_sinr_db: to_db(r_ofdm.sinr),
                    isci_db: isci.isci_db(),
                })
            })?;
            points.push((speed, nu, snr, trials));
        }
    }
    Ok(points)
}

fn speed_cell(v: f64) -> Cell {
    if v.is_nan() {
        Cell::Empty
    } else {
        v.into()
    }
}

type Pick<'a> = (&'a str, fn(&Trial) -> f64);

fn aggregate(points: &[Point], pick: &[Pick]) -> Result<Value> {
    let mut out = Vec::new();
    for (speed, nu, snr, trials) in points {
        let mut entry = json!({
            "speed_mps": if speed.is_nan() { Value::Null } else { json!(speed) },
            "doppler_spread_hz": nu,
            "snr_db": snr,
        });
        for (name, f) in pick {
            let v: Vec<f64> = trials.iter().map(f).collect();
            entry[*name] = quantiles(&v)?;
        }
        out.push(entry);
    }
    Ok(json!({ "points": out }))
}

pub(super) fn nmse_cdf(cfg: &ExperimentConfig) -> Result<Output> {
    let points = sweep(cfg)?;
    let mut table = Table::new(&["speed_mps", "doppler_spread_hz", "snr_db", "trial", "otfs_nmse_db", "ofdm_nmse_db"]);
    for (speed, nu, snr, trials) in &points {
        for (t, r) in trials.iter().enumerate() {
            table.push(vec![speed_cell(*speed), (*nu).into(), (*snr).into(), t.into(), r.otfs_nmse_db.into(), r.ofdm_nmse_db.into()])?;
        }
    }
    let aggregates = aggregate(&points, &[("otfs_nmse_db", |t| t.otfs_nmse_db), ("ofdm_nmse_db", |t| t.ofdm_nmse_db)])?;
    Ok(Output { table, aggregates })
}

pub(super) fn rate_cdf(cfg: &ExperimentConfig) -> Result<Output> {
    let points = sweep(cfg)?;
    let mut table = Table::new(&[
        "speed_mps", "doppler_spread_hz", "snr_db", "trial", "otfs_rate", "ofdm_rate", "otfs_sinr_db", "ofdm_sinr_db", "isci_db",
    ]);
    for (speed, nu, snr, trials) in &points {
        for (t, r) in trials.iter().enumerate() {
            table.push(vec![
                speed_cell(*speed),
                (*nu).into(),
                (*snr).into(),
                t.into(),
                r.otfs_rate.into(),
                r.ofdm_rate.into(),
                r.otfs_sinr_db.into(),
                r.ofdm_sinr_db.into(),
                r.isci_db.into(),
            ])?;
        }
    }
    let aggregates = aggregate(&points, &[("otfs_rate", |t| t.otfs_rate), ("ofdm_rate", |t| t.ofdm_rate)])?;
    Ok(Output { table, aggregates })
}
