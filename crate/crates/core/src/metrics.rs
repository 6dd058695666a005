//! Scalar figures of merit.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{cross_ambiguity, kappa_path, DDChannel, Pulse, TapIndex, TapSet};
use crate::error::{Error, Result};
use crate::transforms::{TFGrid, TFMatrix};

/// Reported NMSE for a perfect estimate.
pub const NMSE_FLOOR_DB: f64 = -300.0;

/// Pairwise summation; fixed association order regardless of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(NMSE_FLOOR_DB)
    } else {
        NMSE_FLOOR_DB
    }
}

/// `10 log₁₀(‖Ĥ − H‖² / ‖H‖²)`, floored at −300 dB.
pub fn nmse_db(estimate: &TFMatrix, truth: &TFMatrix) -> Result<f64> {
    Ok(to_db(nmse_linear(estimate, truth)?))
}

pub fn nmse_linear(estimate: &TFMatrix, truth: &TFMatrix) -> Result<f64> {
    estimate.values().check_same(truth.values())?;
    let denom = truth.values().norm_sqr();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(estimate.values().dist_sqr(truth.values()) / denom)
}

/// Which frame positions enter the per-tap power average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameAveraging {
    /// Every position of the `N × M` grid, as for a frame embedded in a
    /// continuous transmission.
    Stationary,
    /// Only positions whose interfering neighbour lies inside the frame, as
    /// produced by zero-fill transmission of an isolated frame.
    ZeroFillEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TapPower {
    pub dn: i32,
    pub dm: i32,
    pub power: f64,
}

/// Interference powers relative to the desired-signal power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceReport {
    pub isi_power: f64,
    pub ici_power: f64,
    pub isci_power: f64,
    /// Mean `|H_{0,0}|²` per position before normalisation.
    pub desired_power: f64,
    pub per_tap: Vec<TapPower>,
}

impl InterferenceReport {
    fn from_taps(desired_power: f64, per_tap: Vec<TapPower>) -> Self {
        let select = |f: fn(&TapIndex) -> bool| {
            let v: Vec<f64> =
                per_tap.iter().filter(|t| f(&TapIndex::new(t.dn, t.dm))).map(|t| t.power).collect();
            pairwise_sum(&v)
        };
        let isi_power = select(TapIndex::is_isi);
        let ici_power = select(TapIndex::is_ici);
        Self { isi_power, ici_power, isci_power: isi_power + ici_power, desired_power, per_tap }
    }

    pub fn isci_db(&self) -> f64 {
        to_db(self.isci_power)
    }

    pub fn isi_db(&self) -> f64 {
        to_db(self.isi_power)
    }

    pub fn ici_db(&self) -> f64 {
        to_db(self.ici_power)
    }
}

/// `Σ_{k=lo}^{hi−1} e^{jθk}`.
fn geometric(theta: f64, lo: i64, hi: i64) -> Complex64 {
    let count = (hi - lo).max(0);
    if count == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let half = (theta / 2.0).sin();
    if half.abs() < 1e-12 {
        // θ ≡ 0 (mod 2π) up to rounding
        let phase = Complex64::from_polar(1.0, theta * lo as f64);
        return phase * count as f64;
    }
    let mid = Complex64::from_polar(1.0, theta * (lo as f64 + (count - 1) as f64 / 2.0));
    mid * ((theta * count as f64 / 2.0).sin() / half)
}

fn valid_range(len: usize, shift: i32, averaging: FrameAveraging) -> (i64, i64) {
    let len = len as i64;
    match averaging {
        FrameAveraging::Stationary => (0, len),
        FrameAveraging::ZeroFillEdges => ((shift as i64).max(0), (len + shift as i64).min(len)),
    }
}

/// Per-position average of `|H_{δn,δm}[n, m]|²` over the grid for one
/// channel realization, evaluated through the Gram sum over path pairs.
fn tap_power(ch: &DDChannel, pulse: &Pulse, grid: &TFGrid, tap: TapIndex, averaging: FrameAveraging) -> f64 {
    let (t, f) = (grid.symbol_duration(), grid.subcarrier_spacing());
    let (n0, n1) = valid_range(grid.n(), tap.dn, averaging);
    let (m0, m1) = valid_range(grid.m(), tap.dm, averaging);
    let k: Vec<Complex64> = ch.paths().iter().map(|p| kappa_path(p, pulse, tap, grid)).collect();
    let mut total = 0.0;
    for (i, (pi, ki)) in ch.paths().iter().zip(&k).enumerate() {
        if ki.norm_sqr() == 0.0 {
            continue;
        }
        total += ki.norm_sqr() * ((n1 - n0).max(0) * (m1 - m0).max(0)) as f64;
        for (pj, kj) in ch.paths().iter().zip(&k).skip(i + 1) {
            if kj.norm_sqr() == 0.0 {
                continue;
            }
            let sn = geometric(2.0 * PI * t * (pi.doppler - pj.doppler), n0, n1);
            let sm = geometric(-2.0 * PI * f * (pi.delay - pj.delay), m0, m1);
            total += 2.0 * (ki * kj.conj() * sn * sm).re;
        }
    }
    (total / (grid.n() * grid.m()) as f64).max(0.0)
}

/// ISI/ICI/ISCI power of one channel realization, normalised by the mean
/// desired-signal power `|H_{0,0}|²` over the grid.
pub fn isci_power(
    ch: &DDChannel,
    pulse: &Pulse,
    grid: &TFGrid,
    taps: &TapSet,
    averaging: FrameAveraging,
) -> Result<InterferenceReport> {
    let desired = tap_power(ch, pulse, grid, TapIndex::DESIRED, FrameAveraging::Stationary);
    if desired == 0.0 {
        return Err(Error::ZeroReference);
    }
    let per_tap = taps
        .interference()
        .map(|tap| TapPower { dn: tap.dn, dm: tap.dm, power: tap_power(ch, pulse, grid, tap, averaging) / desired })
        .collect();
    Ok(InterferenceReport::from_taps(desired, per_tap))
}

/// Midpoint nodes on `[lo, hi]`; a single node when the interval is empty.
fn nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let h = (hi - lo) / count as f64;
    (0..count).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

/// Ensemble ISCI for the WSSUS model (uniform delay on `[0, τ_D]`, uniform
/// Doppler on `±ν_D/2`): `E|A(δnT − τ, δmF − ν)|² / E|A(−τ, −ν)|²`,
/// evaluated by midpoint quadrature with `points × points` nodes.
pub fn ensemble_isci_power(
    delay_spread: f64,
    doppler_spread: f64,
    pulse: &Pulse,
    grid: &TFGrid,
    taps: &TapSet,
    points: usize,
) -> Result<InterferenceReport> {
    if delay_spread < 0.0 || doppler_spread < 0.0 || points == 0 {
        return Err(Error::InvalidArgument("spreads must be >= 0 and quadrature points > 0".into()));
    }
    let (t, f) = (grid.symbol_duration(), grid.subcarrier_spacing());
    let taus = nodes(0.0, delay_spread, points);
    let nus = nodes(-doppler_spread / 2.0, doppler_spread / 2.0, points);
    let mean = |dn: f64, dm: f64| {
        let v: Vec<f64> = taus
            .iter()
            .flat_map(|&tau| nus.iter().map(move |&nu| (tau, nu)))
            .map(|(tau, nu)| cross_ambiguity(pulse, pulse, dn * t - tau, dm * f - nu).norm_sqr())
            .collect();
        pairwise_sum(&v) / v.len() as f64
    };
    let desired = mean(0.0, 0.0);
    if desired == 0.0 {
        return Err(Error::ZeroReference);
    }
    let per_tap = taps
        .interference()
        .map(|tap| TapPower { dn: tap.dn, dm: tap.dm, power: mean(tap.dn as f64, tap.dm as f64) / desired })
        .collect();
    Ok(InterferenceReport::from_taps(desired, per_tap))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingOverhead {
    /// `⌈τ_D B + 2⌉ · ⌈ν_D S + 2⌉`.
    pub min_slots: usize,
    /// Asymptotic ratio `τ_D ν_D + 4 / (BS)`.
    pub ratio: f64,
    /// `min_slots / (BS)`.
    pub exact_ratio: f64,
}

fn ceil_tol(x: f64) -> f64 {
    (x - 1e-9).ceil()
}

pub fn training_overhead_for(grid: &TFGrid, delay_spread: f64, doppler_spread: f64) -> Result<TrainingOverhead> {
    if delay_spread < 0.0 || doppler_spread < 0.0 {
        return Err(Error::InvalidArgument("spreads must be >= 0".into()));
    }
    let product = delay_spread * doppler_spread;
    if product >= 1.0 {
        return Err(Error::Overspread { product });
    }
    let bs = grid.bs();
    let slots = ceil_tol(delay_spread * grid.bandwidth() + 2.0) * ceil_tol(doppler_spread * grid.frame_length() + 2.0);
    Ok(TrainingOverhead { min_slots: slots as usize, ratio: product + 4.0 / bs, exact_ratio: slots / bs })
}

pub fn training_overhead(grid: &TFGrid, ch: &DDChannel) -> Result<TrainingOverhead> {
    training_overhead_for(grid, ch.delay_spread(), ch.doppler_spread())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub overhead: f64,
    pub sinr: f64,
    /// bits/s/Hz
    pub rate: f64,
}

/// `(1 − overhead) · log₂(1 + P_sig / (P_isci + σ² + P_err))`, treating the
/// estimation error as additional Gaussian interference.
pub fn achievable_rate(
    signal_power: f64,
    isci_power: f64,
    noise_var: f64,
    est_error_power: f64,
    overhead: f64,
) -> Result<RateReport> {
    for (name, v) in [("signal", signal_power), ("isci", isci_power), ("noise", noise_var), ("error", est_error_power)] {
        if v.is_nan() || v < 0.0 {
            return Err(Error::InvalidArgument(format!("{name} power must be >= 0, got {v}")));
        }
    }
    if !(0.0..1.0).contains(&overhead) {
        return Err(Error::InvalidArgument(format!("overhead must lie in [0, 1), got {overhead}")));
    }
    let impairment = isci_power + noise_var + est_error_power;
    let sinr = if impairment == 0.0 {
        if signal_power == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        signal_power / impairment
    };
    Ok(RateReport { overhead, sinr, rate: (1.0 - overhead) * sinr.ln_1p() / std::f64::consts::LN_2 })
}

/// Empirical CDF with ties collapsed to a single step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    pub values: Vec<f64>,
    pub ordinates: Vec<f64>,
}

impl CdfSeries {
    /// `F(x)`: fraction of samples `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.ordinates[idx - 1]
        }
    }

    /// Smallest sample value with `F ≥ q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let idx = self.ordinates.partition_point(|&o| o < q - 1e-12).min(self.values.len() - 1);
        self.values[idx]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// `sup |F(x) − G(x)|` against a continuous reference CDF, checked on
    /// both sides of every step.
    pub fn ks_distance(&self, reference: impl Fn(f64) -> f64) -> f64 {
        let mut prev = 0.0;
        let mut worst: f64 = 0.0;
        for (&v, &o) in self.values.iter().zip(&self.ordinates) {
            let g = reference(v);
            worst = worst.max((g - prev).abs()).max((o - g).abs());
            prev = o;
        }
        worst
    }
}

pub fn cdf(samples: &[f64]) -> Result<CdfSeries> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("CDF of an empty sample set".into()));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("CDF samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total = sorted.len() as f64;
    let mut values = Vec::new();
    let mut ordinates = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        if i + 1 < sorted.len() && sorted[i + 1] == v {
            continue;
        }
        values.push(v);
        ordinates.push((i + 1) as f64 / total);
    }
    Ok(CdfSeries { values, ordinates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_matrix, generate_wssus};
    use crate::matrix::CMatrix;
    use approx::assert_relative_eq;

    fn grid() -> TFGrid {
        TFGrid::from_spacing(200e3, 16, 16).unwrap()
    }

    #[test]
    fn nmse_definition() {
        let g = grid();
        let h = TFMatrix::new(g, CMatrix::from_fn(16, 16, |n, m| Complex64::new(1.0 + n as f64, m as f64))).unwrap();
        assert_eq!(nmse_db(&h, &h).unwrap(), NMSE_FLOOR_DB);
        assert_relative_eq!(nmse_db(&TFMatrix::zeros(g), &h).unwrap(), 0.0, epsilon = 1e-12);
        let e = h.values().scale(0.1);
        let noisy = TFMatrix::new(g, h.values() + &e).unwrap();
        assert_relative_eq!(nmse_db(&noisy, &h).unwrap(), -20.0, epsilon = 1e-9);
        assert!(matches!(nmse_db(&h, &TFMatrix::zeros(g)), Err(Error::ZeroReference)));
    }

    #[test]
    fn geometric_matches_loop() {
        for &theta in &[0.0, 1e-14, 0.3, -2.1, 2.0 * PI] {
            for &(lo, hi) in &[(0i64, 7i64), (2, 9), (3, 3)] {
                let direct: Complex64 = (lo..hi).map(|k| Complex64::from_polar(1.0, theta * k as f64)).sum();
                assert!((geometric(theta, lo, hi) - direct).norm() < 1e-10);
            }
        }
    }

    fn brute_tap_power(ch: &DDChannel, pulse: &Pulse, g: &TFGrid, tap: TapIndex, avg: FrameAveraging) -> f64 {
        let h = channel_matrix(ch, pulse, g, tap);
        let (n0, n1) = valid_range(g.n(), tap.dn, avg);
        let (m0, m1) = valid_range(g.m(), tap.dm, avg);
        let mut s = 0.0;
        for n in n0..n1 {
            for m in m0..m1 {
                s += h.values()[(n as usize, m as usize)].norm_sqr();
            }
        }
        s / (g.n() * g.m()) as f64
    }

    #[test]
    fn gram_sum_matches_brute_force() {
        let g = grid();
        let pulse = Pulse::rectangular(g.symbol_duration());
        let ch = generate_wssus(1e-6, 20e3, 6, 11).unwrap();
        for tap in [TapIndex::new(0, 0), TapIndex::new(1, 0), TapIndex::new(0, -2), TapIndex::new(1, 3)] {
            for avg in [FrameAveraging::Stationary, FrameAveraging::ZeroFillEdges] {
                let fast = tap_power(&ch, &pulse, &g, tap, avg);
                let slow = brute_tap_power(&ch, &pulse, &g, tap, avg);
                assert_relative_eq!(fast, slow, max_relative = 1e-9, epsilon = 1e-18);
            }
        }
    }

    #[test]
    fn zero_spread_has_no_interference() {
        let g = grid();
        let pulse = Pulse::rectangular(g.symbol_duration());
        let ch = DDChannel::single(0.0, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        let r = isci_power(&ch, &pulse, &g, &TapSet::default_for(g.m()), FrameAveraging::Stationary).unwrap();
        assert!(r.isi_power < 1e-20 && r.ici_power < 1e-20);
        let e = ensemble_isci_power(0.0, 0.0, &pulse, &g, &TapSet::default_for(g.m()), 32).unwrap();
        assert!(e.isci_power < 1e-20);
    }

    #[test]
    fn report_bookkeeping() {
        let g = grid();
        let pulse = Pulse::rectangular(g.symbol_duration());
        let r = ensemble_isci_power(1e-6, 20e3, &pulse, &g, &TapSet::default_for(g.m()), 32).unwrap();
        let total: f64 = r.per_tap.iter().map(|t| t.power).sum();
        assert_relative_eq!(total, r.isci_power, max_relative = 1e-12);
        assert_relative_eq!(r.isi_power + r.ici_power, r.isci_power, max_relative = 1e-15);
        assert!(r.per_tap.iter().all(|t| t.power >= 0.0));
        // rectangular pulses leak only into the next symbol
        assert!(r.per_tap.iter().filter(|t| t.dn < 0 || t.dn > 1).all(|t| t.power < 1e-30));
    }

    #[test]
    fn overhead_examples() {
        let g = TFGrid::from_spacing(1e5, 10, 10).unwrap();
        let zero = training_overhead_for(&g, 0.0, 0.0).unwrap();
        assert_eq!(zero.min_slots, 4);
        // τ_D B = 10, ν_D S = 8
        let b = g.bandwidth();
        let s = g.frame_length();
        let o = training_overhead_for(&g, 10.0 / b, 8.0 / s).unwrap();
        assert_eq!(o.min_slots, 120);
        assert_relative_eq!(o.ratio * g.bs(), 84.0, max_relative = 1e-12);
        assert!(matches!(training_overhead_for(&g, 1e-3, 1e3), Err(Error::Overspread { .. })));
    }

    #[test]
    fn rate_examples() {
        let r = achievable_rate(1.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(r.rate, 1.0, epsilon = 1e-12);
        let r = achievable_rate(3.0, 0.0, 1.0, 0.0, 0.5).unwrap();
        assert_relative_eq!(r.rate, 1.0, epsilon = 1e-12);
        assert!(achievable_rate(1.0, -1.0, 1.0, 0.0, 0.0).is_err());
        assert!(achievable_rate(1.0, 0.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn cdf_examples() {
        let c = cdf(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(c.values, vec![2.0]);
        assert_eq!(c.ordinates, vec![1.0]);
        let c = cdf(&[2.0, 1.0]).unwrap();
        assert_eq!(c.values, vec![1.0, 2.0]);
        assert_eq!(c.ordinates, vec![0.5, 1.0]);
        assert_eq!(c.eval(0.5), 0.0);
        assert_eq!(c.eval(1.5), 0.5);
        assert_eq!(c.median(), 1.0);
        assert!(cdf(&[]).is_err());
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert_relative_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>(), epsilon = 1e-10);
    }
}
