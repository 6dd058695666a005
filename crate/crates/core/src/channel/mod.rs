//! Ground-truth doubly-dispersive channel in the delay-Doppler domain and its
//! discrete T-F channel matrices `H_{δn,δm}`.

mod ambiguity;
mod io;
mod taps;

pub use ambiguity::{cross_ambiguity, cross_ambiguity_quadrature, Pulse, PulseKind};
pub use io::{ChannelDocument, CHANNEL_SCHEMA};
pub use taps::{TapIndex, TapSet};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::rng::rng_from;
use crate::transforms::{to_dd, DDMatrix, TFGrid, TFMatrix};

/// One propagation path: delay (s), Doppler shift (Hz) and complex gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DDPath {
    pub delay: f64,
    pub doppler: f64,
    pub gain: Complex64,
}

/// Finite set of paths bounded by a one-sided delay spread `τ_D` and a
/// two-sided Doppler spread `ν_D` (paths lie in `[0, τ_D] × [−ν_D/2, ν_D/2]`).
#[derive(Debug, Clone, PartialEq)]
pub struct DDChannel {
    paths: Vec<DDPath>,
    delay_spread: f64,
    doppler_spread: f64,
    seed: Option<u64>,
}

impl DDChannel {
    pub fn new(paths: Vec<DDPath>, delay_spread: f64, doppler_spread: f64) -> Result<Self> {
        if !(delay_spread >= 0.0 && doppler_spread >= 0.0) || !delay_spread.is_finite() || !doppler_spread.is_finite() {
            return Err(Error::InvalidChannel(format!(
                "spreads must be finite and non-negative, got tau_D={delay_spread}, nu_D={doppler_spread}"
            )));
        }
        let product = delay_spread * doppler_spread;
        if product >= 1.0 {
            return Err(Error::Overspread { product });
        }
        for (i, p) in paths.iter().enumerate() {
            if !(0.0..=delay_spread).contains(&p.delay) {
                return Err(Error::InvalidChannel(format!("path {i}: delay {} outside [0, {delay_spread}]", p.delay)));
            }
            if p.doppler.abs() > doppler_spread / 2.0 {
                return Err(Error::InvalidChannel(format!(
                    "path {i}: |doppler| {} exceeds nu_D/2 = {}",
                    p.doppler.abs(),
                    doppler_spread / 2.0
                )));
            }
            if !(p.gain.re.is_finite() && p.gain.im.is_finite()) {
                return Err(Error::InvalidChannel(format!("path {i}: non-finite gain")));
            }
        }
        Ok(Self { paths, delay_spread, doppler_spread, seed: None })
    }

    /// Channel with no paths (zero response).
    pub fn empty(delay_spread: f64, doppler_spread: f64) -> Result<Self> {
        Self::new(Vec::new(), delay_spread, doppler_spread)
    }

    pub fn single(delay: f64, doppler: f64, gain: Complex64) -> Result<Self> {
        Self::new(vec![DDPath { delay, doppler, gain }], delay, 2.0 * doppler.abs())
    }

    pub fn paths(&self) -> &[DDPath] {
        &self.paths
    }
    pub fn delay_spread(&self) -> f64 {
        self.delay_spread
    }
    pub fn doppler_spread(&self) -> f64 {
        self.doppler_spread
    }
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// `τ_D < T` and `ν_D < F`.
    pub fn crystallized(&self, grid: &TFGrid) -> bool {
        self.delay_spread < grid.symbol_duration() && self.doppler_spread < grid.subcarrier_spacing()
    }

    pub(crate) fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

/// WSSUS realization: `L` paths with uniform delays on `[0, τ_D]`, uniform
/// Dopplers on `[−ν_D/2, ν_D/2]` and i.i.d. `CN(0, 1/L)` gains.
pub fn generate_wssus(delay_spread: f64, doppler_spread: f64, num_paths: usize, seed: u64) -> Result<DDChannel> {
    let product = delay_spread * doppler_spread;
    if product >= 1.0 {
        return Err(Error::Overspread { product });
    }
    if num_paths == 0 {
        return Err(Error::InvalidArgument("WSSUS channel needs at least one path".into()));
    }
    let mut rng = rng_from(seed);
    let sigma = (0.5 / num_paths as f64).sqrt();
    let paths = (0..num_paths)
        .map(|_| {
            let delay = delay_spread * rng.random::<f64>();
            let doppler = doppler_spread * (rng.random::<f64>() - 0.5);
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            DDPath { delay, doppler, gain: Complex64::new(re, im) * sigma }
        })
        .collect();
    Ok(DDChannel::new(paths, delay_spread, doppler_spread)?.with_seed(Some(seed)))
}

/// Weight `κ_{δn,δm}` attached to one path:
/// `α · e^{−j2π(ν − δm F)τ} · A(δn T − τ, δm F − ν)`.
pub fn kappa_path(path: &DDPath, pulse: &Pulse, tap: TapIndex, grid: &TFGrid) -> Complex64 {
    let (t, f) = (grid.symbol_duration(), grid.subcarrier_spacing());
    let dn = tap.dn as f64;
    let dm = tap.dm as f64;
    let phase = Complex64::from_polar(1.0, -2.0 * PI * (path.doppler - dm * f) * path.delay);
    path.gain * phase * cross_ambiguity(pulse, pulse, dn * t - path.delay, dm * f - path.doppler)
}

/// `κ_{δn,δm}(τ, ν)` for the discrete path model: the weight of the path located
/// at `(τ, ν)`, or zero if no path is there.
pub fn kappa(ch: &DDChannel, pulse: &Pulse, tap: TapIndex, tau: f64, nu: f64, grid: &TFGrid) -> Complex64 {
    ch.paths
        .iter()
        .filter(|p| p.delay == tau && p.doppler == nu)
        .map(|p| kappa_path(p, pulse, tap, grid))
        .sum()
}

/// `H_{δn,δm}[n, m]` over the grid, with slot index offset by `slot_offset`
/// (absolute slot `n + slot_offset`).
pub fn channel_matrix_at(ch: &DDChannel, pulse: &Pulse, grid: &TFGrid, tap: TapIndex, slot_offset: usize) -> TFMatrix {
    let (n_slots, n_sc) = (grid.n(), grid.m());
    let (t, f) = (grid.symbol_duration(), grid.subcarrier_spacing());
    if !ch.crystallized(grid) {
        log::warn!(
            "crystallization violated: tau_D={} (T={}), nu_D={} (F={})",
            ch.delay_spread(),
            t,
            ch.doppler_spread(),
            f
        );
    }
    let mut values = CMatrix::zeros(n_slots, n_sc);
    for p in &ch.paths {
        let k = kappa_path(p, pulse, tap, grid);
        if k == Complex64::new(0.0, 0.0) {
            continue;
        }
        let time: Vec<Complex64> = (0..n_slots)
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * (n + slot_offset) as f64 * t * p.doppler) * k)
            .collect();
        let freq: Vec<Complex64> =
            (0..n_sc).map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 * f * p.delay)).collect();
        for (n, a) in time.iter().enumerate() {
            for (v, b) in values.row_mut(n).iter_mut().zip(&freq) {
                *v += a * b;
            }
        }
    }
    TFMatrix::new(*grid, values).expect("finite channel matrix")
}

/// Single entry `H_{δn,δm}[n, m]`.
pub fn channel_sample(ch: &DDChannel, pulse: &Pulse, grid: &TFGrid, tap: TapIndex, n: usize, m: usize) -> Complex64 {
    let (t, f) = (grid.symbol_duration(), grid.subcarrier_spacing());
    ch.paths
        .iter()
        .map(|p| {
            kappa_path(p, pulse, tap, grid)
                * Complex64::from_polar(1.0, 2.0 * PI * (n as f64 * t * p.doppler - m as f64 * f * p.delay))
        })
        .sum()
}

pub fn channel_matrix(ch: &DDChannel, pulse: &Pulse, grid: &TFGrid, tap: TapIndex) -> TFMatrix {
    channel_matrix_at(ch, pulse, grid, tap, 0)
}

/// Ground-truth D-D response `SFFT{H_{0,0}}`.
pub fn dd_truth(ch: &DDChannel, pulse: &Pulse, grid: &TFGrid) -> DDMatrix {
    to_dd(&channel_matrix(ch, pulse, grid, TapIndex::DESIRED))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, m: usize) -> TFGrid {
        TFGrid::from_spacing(15e3, n, m).unwrap()
    }

    #[test]
    fn rejects_overspread_and_out_of_bounds() {
        assert!(matches!(generate_wssus(1e-3, 2e3, 4, 1), Err(Error::Overspread { .. })));
        let bad = DDPath { delay: 2e-6, doppler: 0.0, gain: Complex64::new(1.0, 0.0) };
        assert!(DDChannel::new(vec![bad], 1e-6, 100.0).is_err());
        let bad = DDPath { delay: 0.0, doppler: 60.0, gain: Complex64::new(1.0, 0.0) };
        assert!(DDChannel::new(vec![bad], 1e-6, 100.0).is_err());
    }

    #[test]
    fn single_path_generation() {
        let ch = generate_wssus(1e-6, 2e4, 1, 42).unwrap();
        assert_eq!(ch.paths().len(), 1);
        let p = ch.paths()[0];
        assert!((0.0..=1e-6).contains(&p.delay) && p.doppler.abs() <= 1e4);
        assert!(ch.total_power().is_finite());
        assert_eq!(ch, generate_wssus(1e-6, 2e4, 1, 42).unwrap());
        assert_ne!(ch, generate_wssus(1e-6, 2e4, 1, 43).unwrap());
    }

    #[test]
    fn kappa_trivial_taps() {
        let g = grid(8, 8);
        let pulse = Pulse::rectangular(g.symbol_duration());
        let ch = DDChannel::single(0.0, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        let k00 = kappa(&ch, &pulse, TapIndex::new(0, 0), 0.0, 0.0, &g);
        assert!((k00 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(kappa(&ch, &pulse, TapIndex::new(1, 0), 0.0, 0.0, &g).norm() < 1e-15);
        assert_eq!(kappa(&ch, &pulse, TapIndex::new(0, 0), 1e-7, 0.0, &g), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn kappa_matches_independent_formula() {
        let g = grid(8, 8);
        let (t, f) = (g.symbol_duration(), g.subcarrier_spacing());
        let pulse = Pulse::rectangular(t);
        let path = DDPath { delay: 0.13 * t, doppler: -0.07 * f, gain: Complex64::new(0.6, -0.8) };
        let ch = DDChannel::new(vec![path], 0.2 * t, 0.2 * f).unwrap();
        let got = kappa(&ch, &pulse, TapIndex::new(0, 1), path.delay, path.doppler, &g);
        // overlap integral for delay −τ: ∫_{τ}^{T} (1/T) e^{−j2πν' u} du with ν' = F − ν
        let nu_p = f - path.doppler;
        let (lo, hi) = (path.delay, t);
        let integral = (Complex64::from_polar(1.0, -2.0 * PI * nu_p * hi)
            - Complex64::from_polar(1.0, -2.0 * PI * nu_p * lo))
            / Complex64::new(0.0, -2.0 * PI * nu_p)
            / t;
        let want = path.gain * Complex64::from_polar(1.0, -2.0 * PI * (path.doppler - f) * path.delay) * integral;
        assert!((got - want).norm() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn flat_single_path_matrix() {
        let g = grid(6, 5);
        let pulse = Pulse::rectangular(g.symbol_duration());
        let alpha = Complex64::new(0.3, 0.4);
        let ch = DDChannel::single(0.0, 0.0, alpha).unwrap();
        let h = channel_matrix(&ch, &pulse, &g, TapIndex::DESIRED);
        assert!(h.values().as_slice().iter().all(|z| (z - alpha).norm() < 1e-14));
        for dn in -2..=2 {
            for dm in -4..=4 {
                if (dn, dm) != (0, 0) {
                    assert!(channel_matrix(&ch, &pulse, &g, TapIndex::new(dn, dm)).values().max_abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn on_grid_path_lands_on_its_dd_bin() {
        let g = grid(32, 32);
        let pulse = Pulse::rectangular(g.symbol_duration());
        let ch = DDChannel::single(3.0 / g.bandwidth(), 5.0 / g.frame_length(), Complex64::new(1.0, 0.0)).unwrap();
        let dd = dd_truth(&ch, &pulse, &g);
        let v = dd.values();
        let (mut best, mut arg) = (0.0, (0, 0));
        for r in 0..v.rows() {
            for c in 0..v.cols() {
                if v[(r, c)].norm() > best {
                    best = v[(r, c)].norm();
                    arg = (r, c);
                }
            }
        }
        assert_eq!(arg, (3, 5));
        assert!(v[(3, 5)].norm_sqr() / v.norm_sqr() > 0.99);
    }

    #[test]
    fn matrix_matches_brute_force_and_triangle_bound() {
        let g = grid(8, 8);
        let t = g.symbol_duration();
        let pulse = Pulse::rectangular(t);
        let ch = generate_wssus(0.2 * t, 0.2 * g.subcarrier_spacing(), 3, 7).unwrap();
        for tap in [TapIndex::new(0, 0), TapIndex::new(1, -1), TapIndex::new(0, 2)] {
            let h = channel_matrix(&ch, &pulse, &g, tap);
            let brute = CMatrix::from_fn(8, 8, |n, m| {
                ch.paths()
                    .iter()
                    .map(|p| {
                        kappa(&ch, &pulse, tap, p.delay, p.doppler, &g)
                            * Complex64::from_polar(
                                1.0,
                                2.0 * PI * (n as f64 * t * p.doppler - m as f64 * g.subcarrier_spacing() * p.delay),
                            )
                    })
                    .sum()
            });
            assert!(h.values().rel_error(&brute) < 1e-12);
            let bound: f64 = ch.paths().iter().map(|p| p.gain.norm()).sum();
            assert!(h.values().max_abs() <= bound + 1e-12);
        }
    }

    #[test]
    fn empty_channel_truth_is_zero() {
        let g = grid(8, 8);
        let ch = DDChannel::empty(1e-6, 100.0).unwrap();
        assert_eq!(dd_truth(&ch, &Pulse::rectangular(g.symbol_duration()), &g).values().max_abs(), 0.0);
    }
}
