use anyhow::{ensure, Result};
use ddest::channel::generate_wssus;
use ddest::estimator::decompose_error;
use ddest::metrics::{nmse_linear, to_db, training_overhead_for};
use ddest::modem::{build_frame, transmit};
use ddest::rng::derive_seed;
use serde_json::json;

use super::{mean, par_trials, quantiles, stream, trial_seed, Output};
use crate::config::{noise_var, ExperimentConfig};
use crate::table::Table;

pub(super) fn aliasing_vs_bs(cfg: &ExperimentConfig) -> Result<Output> {
    let sizes = if cfg.sweep.grid_sizes.is_empty() { vec![[cfg.grid.n, cfg.grid.m]] } else { cfg.sweep.grid_sizes.clone() };
    let (tau, nu) = (cfg.channel.delay_spread, cfg.doppler_spread()?);
    let mut table = Table::new(&[
        "bs", "n", "m", "n_pilots", "m_pilots", "snr_db", "trial", "nmse_db", "truncation_db", "aliasing_db", "isci_db",
    ]);
    let mut points = Vec::new();
    for &[n, m] in &sizes {
        let grid = cfg.grid_for(tau, nu, n, m)?;
        let pattern = cfg.pattern(&grid)?;
        ensure!(pattern.n_pilots() % 2 == 0, "grid {n}x{m} with l_n = {} leaves an odd pilot count", cfg.pilots.l_n);
        let pulse = ExperimentConfig::pulse(&grid);
        let taps = cfg.taps(m);
        let overhead = training_overhead_for(&grid, tau, nu)?;
        for &snr in &cfg.snr_db {
            let sigma2 = noise_var(snr);
            let trials = par_trials(cfg.trials, |t| {
                let s = trial_seed(cfg.seed, t);
                let ch = generate_wssus(tau, nu, cfg.channel.paths, derive_seed(s, stream::CHANNEL))?;
                let frame = build_frame(&grid, &pattern, derive_seed(s, stream::FRAME))?;
                let rx = transmit(&frame, &ch, &pulse, &taps, sigma2, derive_seed(s, stream::NOISE))?;
                let d = decompose_error(&ch, &pulse, &pattern, &taps, &frame, &rx)?;
                let p = d.powers;
                Ok([nmse_linear(&d.estimate, &d.desired)?, p.truncation / p.desired, p.aliasing / p.desired, p.isci / p.desired])
            })?;
            for (t, v) in trials.iter().enumerate() {
                table.push(vec![
                    grid.bs().into(),
                    n.into(),
                    m.into(),
                    pattern.n_pilots().into(),
                    pattern.m_pilots().into(),
                    snr.into(),
                    t.into(),
                    to_db(v[0]).into(),
                    to_db(v[1]).into(),
                    to_db(v[2]).into(),
                    to_db(v[3]).into(),
                ])?;
            }
            let col = |k: usize| trials.iter().map(|v| v[k]).collect::<Vec<_>>();
            let nmse_db: Vec<f64> = col(0).into_iter().map(to_db).collect();
            points.push(json!({
                "bs": grid.bs(),
                "n": n,
                "m": m,
                "snr_db": snr,
                "pilot_overhead": pattern.overhead(),
                "training_overhead_ratio": overhead.ratio,
                "mean_nmse_db": to_db(mean(&col(0))),
                "mean_truncation_db": to_db(mean(&col(1))),
                "mean_aliasing_db": to_db(mean(&col(2))),
                "nmse_db": quantiles(&nmse_db)?,
            }));
        }
    }
    Ok(Output { table, aggregates: json!({ "points": points }) })
}
