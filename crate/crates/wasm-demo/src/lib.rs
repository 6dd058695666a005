//! Browser bindings for three views of the simulator: the delay-Doppler
//! response of a random channel (raw or rotated into the estimator's
//! corner), the rectangular-pulse cross-ambiguity surface, and the
//! interpolation error as the pilot spacing grows.
//!
//! The `*_values` functions are plain Rust so they can be tested natively;
//! the exported wrappers only convert errors.

use ddest::channel::{channel_matrix, cross_ambiguity, dd_truth, generate_wssus, Pulse, TapIndex, TapSet};
use ddest::estimator::{interpolate, ls_pilot_estimate};
use ddest::metrics::{nmse_db, to_db};
use ddest::modem::{build_frame, transmit, PilotPattern};
use ddest::transforms::{rotate_dd, TFGrid};
use ddest::Result as CoreResult;
use wasm_bindgen::prelude::*;

/// Sub-carrier spacing of every demo grid.
pub const SPACING_HZ: f64 = 200e3;
/// N = M of every demo grid.
pub const GRID: usize = 64;

fn grid() -> TFGrid {
    TFGrid::from_spacing(SPACING_HZ, GRID, GRID).expect("static grid")
}

/// `|H̃|` in dB (row-major `M × N`, delay rows) of one WSSUS draw. With
/// `rotate_for = Some(L_N)` the response is rotated as the estimator sees it.
pub fn dd_magnitude_values(tau_us: f64, nu_khz: f64, paths: usize, seed: u64, rotate_for: Option<usize>) -> CoreResult<Vec<f64>> {
    let g = grid();
    let ch = generate_wssus(tau_us * 1e-6, nu_khz * 1e3, paths, seed)?;
    let mut dd = dd_truth(&ch, &Pulse::rectangular(g.symbol_duration()), &g);
    if let Some(l_n) = rotate_for {
        dd = rotate_dd(&dd, PilotPattern::new(&g, l_n, 1)?.n_pilots())?;
    }
    let peak = dd.values().as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    Ok(dd.values().as_slice().iter().map(|z| to_db((z.norm() / peak).powi(2)).max(-60.0)).collect())
}

/// `|A(τ, ν)|` on a `rows × cols` lattice, τ ∈ [−T, T] along columns and
/// ν ∈ [−span·F, span·F] along rows, for unit-energy rectangular pulses.
pub fn ambiguity_values(rows: usize, cols: usize, span: f64) -> Vec<f64> {
    let t = 1.0;
    let p = Pulse::rectangular(t);
    let axis = |k: usize, len: usize, half: f64| if len < 2 { 0.0 } else { -half + 2.0 * half * k as f64 / (len - 1) as f64 };
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let nu = axis(r, rows, span / t);
        for c in 0..cols {
            out.push(cross_ambiguity(&p, &p, axis(c, cols, t), nu).norm());
        }
    }
    out
}

/// Single-draw NMSE (dB) of SFFT interpolation on the 64 × 64
/// grid for each pilot spacing `L_N ∈ {2, 4, 8, 16}` at fixed `L_M`.
pub fn interpolation_sweep_values(tau_us: f64, nu_khz: f64, l_m: usize, snr_db: f64, seed: u64) -> CoreResult<Vec<f64>> {
    let g = grid();
    let pulse = Pulse::rectangular(g.symbol_duration());
    let ch = generate_wssus(tau_us * 1e-6, nu_khz * 1e3, 20, seed)?;
    let taps = TapSet::default_for(g.m());
    let truth = channel_matrix(&ch, &pulse, &g, TapIndex::DESIRED);
    let noise = if snr_db.is_finite() { 10f64.powf(-snr_db / 10.0) } else { 0.0 };
    SPACINGS
        .iter()
        .map(|&l_n| {
            let p = PilotPattern::new(&g, l_n, l_m)?;
            let frame = build_frame(&g, &p, seed)?;
            let rx = transmit(&frame, &ch, &pulse, &taps, noise, seed ^ 0x5eed)?;
            nmse_db(&interpolate(&ls_pilot_estimate(&rx, &frame, &p)?)?.h, &truth)
        })
        .collect()
}

/// Pilot spacings along time swept by [`interpolation_sweep_values`].
pub const SPACINGS: [usize; 4] = [2, 4, 8, 16];

fn js(e: ddest::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn grid_size() -> usize {
    GRID
}

#[wasm_bindgen]
pub fn dd_magnitude(tau_us: f64, nu_khz: f64, paths: usize, seed: u32, rotate_l_n: usize) -> Result<Vec<f64>, JsError> {
    dd_magnitude_values(tau_us, nu_khz, paths, seed.into(), (rotate_l_n > 0).then_some(rotate_l_n)).map_err(js)
}

#[wasm_bindgen]
pub fn ambiguity(rows: usize, cols: usize, span: f64) -> Vec<f64> {
    ambiguity_values(rows, cols, span)
}

#[wasm_bindgen]
pub fn interpolation_sweep(tau_us: f64, nu_khz: f64, l_m: usize, snr_db: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    interpolation_sweep_values(tau_us, nu_khz, l_m, snr_db, seed.into()).map_err(js)
}

#[wasm_bindgen]
pub fn pilot_spacings() -> Vec<u32> {
    SPACINGS.iter().map(|&s| s as u32).collect()
}
