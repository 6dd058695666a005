use anyhow::{ensure, Result};
use ddest::channel::{channel_matrix_at, generate_wssus, DDChannel, Pulse, TapIndex};
use ddest::estimator::{
    interpolate, ls_pilot_column, ls_window, CsiEstimate, DataAidedTracker, PipelineOutput, PipelineState, TrackStep,
};
use ddest::metrics::{nmse_db, to_db};
use ddest::modem::{build_stream_frame, transmit, Frame, PilotPattern, RxFrame};
use ddest::rng::derive_seed;
use ddest::transforms::TFGrid;
use serde_json::json;

use super::{mean_db, par_trials, quantiles, stream, trial_seed, Output};
use crate::config::{noise_var, ExperimentConfig};
use crate::table::{Cell, Table};

struct StreamRun {
    window: TFGrid,
    pattern: PilotPattern,
    pulse: Pulse,
    ch: DDChannel,
    frame: Frame,
    rx: RxFrame,
}

fn simulate(cfg: &ExperimentConfig, snr: f64, trial: usize) -> Result<StreamRun> {
    let (tau, nu) = (cfg.channel.delay_spread, cfg.doppler_spread()?);
    let window = cfg.grid_for(tau, nu, cfg.grid.n, cfg.grid.m)?;
    let slots = cfg.sweep.stream_slots.unwrap_or(4 * window.n());
    let pattern = cfg.pattern(&window)?;
    ensure!(slots >= window.n() && slots.is_multiple_of(pattern.l_n()), "`sweep.stream_slots` must be a multiple of l_n and >= n");
    let long = window.with_dims(slots, window.m())?;
    let pulse = ExperimentConfig::pulse(&window);
    let s = trial_seed(cfg.seed, trial);
    let ch = generate_wssus(tau, nu, cfg.channel.paths, derive_seed(s, stream::CHANNEL))?;
    let frame = build_stream_frame(&long, &pattern, derive_seed(s, stream::FRAME))?;
    let rx = transmit(&frame, &ch, &pulse, &cfg.taps(window.m()), noise_var(snr), derive_seed(s, stream::NOISE))?;
    Ok(StreamRun { window, pattern, pulse, ch, frame, rx })
}

impl StreamRun {
    fn truth(&self, start: usize) -> ddest::transforms::TFMatrix {
        channel_matrix_at(&self.ch, &self.pulse, &self.window, TapIndex::DESIRED, start)
    }

    fn batch(&self, start: usize) -> Result<CsiEstimate> {
        Ok(interpolate(&ls_window(&self.rx, &self.frame, &self.pattern, &self.window, start)?)?)
    }
}

pub(super) fn pipeline_demo(cfg: &ExperimentConfig) -> Result<Output> {
    let mut table = Table::new(&[
        "snr_db", "trial", "window_start", "window_end", "last_pilot_slot", "nmse_db", "batch_rel_diff",
    ]);
    let mut points = Vec::new();
    for &snr in &cfg.snr_db {
        let trials = par_trials(cfg.trials, |t| {
            let run = simulate(cfg, snr, t)?;
            let mut state = PipelineState::new(run.window, run.pattern)?;
            let mut rows = Vec::new();
            for slot in (0..run.frame.grid().n()).step_by(run.pattern.l_n()) {
                let column = ls_pilot_column(&run.rx, &run.frame, &run.pattern, slot)?;
                if let PipelineOutput::Estimate(est) = state.push(slot, column)? {
                    let batch = run.batch(est.window_start)?;
                    let diff = (est.h.values().dist_sqr(batch.h.values()) / batch.h.values().norm_sqr()).sqrt();
                    let nmse = nmse_db(&est.h, &run.truth(est.window_start))?;
                    rows.push((est.window_start, est.window_end(), slot, nmse, diff));
                }
            }
            Ok(rows)
        })?;
        let mut nmse = Vec::new();
        let mut worst: f64 = 0.0;
        for (t, rows) in trials.iter().enumerate() {
            for &(start, end, slot, e, diff) in rows {
                table.push(vec![snr.into(), t.into(), start.into(), end.into(), slot.into(), e.into(), diff.into()])?;
                nmse.push(e);
                worst = worst.max(diff);
            }
        }
        points.push(json!({
            "snr_db": snr,
            "windows_per_trial": trials.first().map_or(0, |r| r.len()),
            "mean_nmse_db": mean_db(&nmse),
            "nmse_db": quantiles(&nmse)?,
            "max_batch_rel_diff": worst,
        }));
    }
    Ok(Output { table, aggregates: json!({ "points": points }) })
}

/// Error over the columns `[from, est.window_end())` that lie beyond the
/// previous window.
fn predicted_error(run: &StreamRun, est: &CsiEstimate, from: usize) -> Option<f64> {
    if from >= est.window_end() {
        return None;
    }
    let truth = run.truth(est.window_start);
    let (mut err, mut pow) = (0.0, 0.0);
    for n in (from - est.window_start)..run.window.n() {
        for (a, b) in est.h.values().row(n).iter().zip(truth.values().row(n)) {
            err += (a - b).norm_sqr();
            pow += b.norm_sqr();
        }
    }
    Some(to_db(err / pow.max(f64::MIN_POSITIVE)))
}

pub(super) fn extrapolation_demo(cfg: &ExperimentConfig) -> Result<Output> {
    let restart = cfg.pilots.restart_every.unwrap_or(DataAidedTracker::DEFAULT_RESTART);
    let mut table = Table::new(&[
        "snr_db", "trial", "step", "source", "window_start", "window_end", "nmse_db", "predicted_slots", "predicted_nmse_db",
    ]);
    let mut points = Vec::new();
    for &snr in &cfg.snr_db {
        let trials = par_trials(cfg.trials, |t| {
            let run = simulate(cfg, snr, t)?;
            let total = run.frame.grid().n();
            let l_n = run.pattern.l_n();
            let mut tracker = DataAidedTracker::new(run.pattern, restart)?;
            let anchor = run.batch(0)?;
            let mut rows = vec![("anchor", anchor.window_start, anchor.window_end(), nmse_db(&anchor.h, &run.truth(0))?, 0, None)];
            let mut prev_end = anchor.window_end();
            tracker.anchor(anchor);
            loop {
                match tracker.step()? {
                    TrackStep::Extrapolated(est) => {
                        if est.window_end() > total {
                            break;
                        }
                        let e = nmse_db(&est.h, &run.truth(est.window_start))?;
                        let p = predicted_error(&run, &est, prev_end);
                        rows.push(("extrapolated", est.window_start, est.window_end(), e, est.window_end() - prev_end, p));
                        prev_end = est.window_end();
                    }
                    TrackStep::NeedsPilots => {
                        let current = tracker.current().expect("anchored").window_start;
                        let start = current.div_ceil(l_n) * l_n;
                        if start + run.window.n() > total {
                            break;
                        }
                        let est = run.batch(start)?;
                        let e = nmse_db(&est.h, &run.truth(start))?;
                        rows.push(("anchor", start, est.window_end(), e, 0, None));
                        prev_end = prev_end.max(est.window_end());
                        tracker.anchor(est);
                    }
                }
            }
            Ok(rows)
        })?;
        let (mut anchored, mut extrapolated, mut predicted) = (Vec::new(), Vec::new(), Vec::new());
        for (t, rows) in trials.iter().enumerate() {
            for (k, &(source, start, end, e, slots, p)) in rows.iter().enumerate() {
                table.push(vec![
                    snr.into(),
                    t.into(),
                    k.into(),
                    source.into(),
                    start.into(),
                    end.into(),
                    e.into(),
                    slots.into(),
                    Cell::from(p),
                ])?;
                if source == "anchor" { anchored.push(e) } else { extrapolated.push(e) }
                predicted.extend(p);
            }
        }
        points.push(json!({
            "snr_db": snr,
            "restart_every": restart,
            "mean_anchor_nmse_db": mean_db(&anchored),
            "mean_extrapolated_nmse_db": mean_db(&extrapolated),
            "mean_predicted_nmse_db": mean_db(&predicted),
        }));
    }
    Ok(Output { table, aggregates: json!({ "points": points }) })
}
