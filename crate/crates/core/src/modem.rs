//! Frame construction on the T-F grid, transmission through the discrete
//! doubly-dispersive channel and one-tap detection.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{kappa_path, DDChannel, Pulse, TapSet};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::rng::rng_from;
use crate::transforms::{TFGrid, TFMatrix};

/// Down-sampled pilot lattice: pilots at `(n̆·L_N, m̆·L_M)`, `N̆ = N/L_N`, `M̆ = M/L_M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PilotPattern {
    l_n: usize,
    l_m: usize,
    n_pilots: usize,
    m_pilots: usize,
}

/// Smallest pilot-grid dimensions that cover the rotated D-D support: `(N̆, M̆)`
/// with `N̆ = ⌈ν_D S + 2⌉` rounded up to even and `M̆ = ⌈τ_D B + 2⌉`.
pub fn min_pilot_dims(grid: &TFGrid, delay_spread: f64, doppler_spread: f64) -> (usize, usize) {
    let n = (doppler_spread * grid.frame_length() + 2.0 - 1e-9).ceil() as usize;
    let m = (delay_spread * grid.bandwidth() + 2.0 - 1e-9).ceil() as usize;
    (n + n % 2, m)
}

impl PilotPattern {
    pub fn new(grid: &TFGrid, l_n: usize, l_m: usize) -> Result<Self> {
        if l_n == 0 || l_m == 0 {
            return Err(Error::InvalidPattern("down-sampling factors must be >= 1".into()));
        }
        if !grid.n().is_multiple_of(l_n) || !grid.m().is_multiple_of(l_m) {
            return Err(Error::InvalidPattern(format!(
                "L_N={l_n} must divide N={} and L_M={l_m} must divide M={}",
                grid.n(),
                grid.m()
            )));
        }
        Ok(Self { l_n, l_m, n_pilots: grid.n() / l_n, m_pilots: grid.m() / l_m })
    }

    /// Sparsest lattice whose pilot-grid dimensions still cover the given spreads.
    pub fn minimal_for(grid: &TFGrid, delay_spread: f64, doppler_spread: f64) -> Result<Self> {
        let (n_min, m_min) = min_pilot_dims(grid, delay_spread, doppler_spread);
        let l_n = (1..=grid.n())
            .rev()
            .find(|&l| grid.n().is_multiple_of(l) && grid.n() / l >= n_min && (grid.n() / l).is_multiple_of(2))
            .ok_or_else(|| {
                Error::InvalidPattern(format!("no even pilot count >= {n_min} divides N={}", grid.n()))
            })?;
        let l_m = (1..=grid.m())
            .rev()
            .find(|&l| grid.m().is_multiple_of(l) && grid.m() / l >= m_min)
            .ok_or_else(|| Error::InvalidPattern(format!("M={} smaller than required {m_min}", grid.m())))?;
        Self::new(grid, l_n, l_m)
    }

    pub fn l_n(&self) -> usize {
        self.l_n
    }
    pub fn l_m(&self) -> usize {
        self.l_m
    }
    /// `N̆`.
    pub fn n_pilots(&self) -> usize {
        self.n_pilots
    }
    /// `M̆`.
    pub fn m_pilots(&self) -> usize {
        self.m_pilots
    }

    pub fn pilot_count(&self) -> usize {
        self.n_pilots * self.m_pilots
    }

    /// `1 / (L_N · L_M)`.
    pub fn overhead(&self) -> f64 {
        1.0 / (self.l_n * self.l_m) as f64
    }

    pub fn is_pilot(&self, n: usize, m: usize) -> bool {
        n.is_multiple_of(self.l_n) && m.is_multiple_of(self.l_m)
    }

    pub fn covers(&self, grid: &TFGrid, delay_spread: f64, doppler_spread: f64) -> bool {
        let (n_min, m_min) = min_pilot_dims(grid, delay_spread, doppler_spread);
        self.n_pilots >= n_min && self.m_pilots >= m_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotLayout {
    /// Scattered lattice used by the SFFT interpolator.
    Lattice(PilotPattern),
    /// OFDM-style block pilots: every sub-carrier at slots `k · block_len`.
    Block { block_len: usize },
}

/// Transmitted QPSK frame with its pilot positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    x: TFMatrix,
    pilot_mask: Vec<bool>,
    layout: PilotLayout,
}

pub fn qpsk_from_bits(b0: bool, b1: bool) -> Complex64 {
    Complex64::new(if b0 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 }, if b1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 })
}

/// Nearest QPSK point.
pub fn qpsk_slice(z: Complex64) -> Complex64 {
    qpsk_from_bits(z.re < 0.0, z.im < 0.0)
}

fn random_qpsk<R: Rng>(rng: &mut R) -> Complex64 {
    qpsk_from_bits(rng.random(), rng.random())
}

impl Frame {
    fn with_mask(grid: &TFGrid, layout: PilotLayout, seed: u64, is_pilot: impl Fn(usize, usize) -> bool) -> Self {
        let mut rng = rng_from(seed);
        let x = CMatrix::from_fn(grid.n(), grid.m(), |_, _| random_qpsk(&mut rng));
        let pilot_mask = (0..grid.n()).flat_map(|n| (0..grid.m()).map(move |m| (n, m))).map(|(n, m)| is_pilot(n, m)).collect();
        Self { x: TFMatrix::new(*grid, x).expect("QPSK is finite"), pilot_mask, layout }
    }

    pub fn grid(&self) -> &TFGrid {
        self.x.grid()
    }
    pub fn symbols(&self) -> &TFMatrix {
        &self.x
    }
    pub fn layout(&self) -> PilotLayout {
        self.layout
    }

    pub fn is_pilot(&self, n: usize, m: usize) -> bool {
        self.pilot_mask[n * self.grid().m() + m]
    }

    pub fn pilot_fraction(&self) -> f64 {
        self.pilot_mask.iter().filter(|&&p| p).count() as f64 / self.pilot_mask.len() as f64
    }

    pub fn pilot_positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.grid().m();
        self.pilot_mask.iter().enumerate().filter(|(_, &p)| p).map(move |(i, _)| (i / m, i % m))
    }

    pub fn data_positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.grid().m();
        self.pilot_mask.iter().enumerate().filter(|(_, &p)| !p).map(move |(i, _)| (i / m, i % m))
    }

    /// Replace the symbol matrix, keeping pilot positions (used for linearity checks).
    pub fn with_symbols(&self, x: CMatrix) -> Result<Self> {
        Ok(Self { x: TFMatrix::new(*self.grid(), x)?, pilot_mask: self.pilot_mask.clone(), layout: self.layout })
    }
}

/// QPSK frame with lattice pilots. Data and pilots are both drawn from a seeded
/// QPSK source, so every pilot has unit modulus.
pub fn build_frame(grid: &TFGrid, pattern: &PilotPattern, seed: u64) -> Result<Frame> {
    if grid.n() != pattern.n_pilots * pattern.l_n || grid.m() != pattern.m_pilots * pattern.l_m {
        return Err(Error::InvalidPattern(format!(
            "pattern {}x{} pilots with factors ({}, {}) does not tile a {}x{} grid",
            pattern.n_pilots,
            pattern.m_pilots,
            pattern.l_n,
            pattern.l_m,
            grid.n(),
            grid.m()
        )));
    }
    let p = *pattern;
    Ok(Frame::with_mask(grid, PilotLayout::Lattice(p), seed, move |n, m| p.is_pilot(n, m)))
}

/// Lattice-pilot frame spanning a stream of `grid.n()` slots whose length is a
/// multiple of `L_N` (the window pattern is reused along time).
pub fn build_stream_frame(grid: &TFGrid, pattern: &PilotPattern, seed: u64) -> Result<Frame> {
    if !grid.n().is_multiple_of(pattern.l_n) || grid.m() != pattern.m_pilots * pattern.l_m {
        return Err(Error::InvalidPattern(format!(
            "stream of {} slots x {} sub-carriers incompatible with L_N={}, L_M={}",
            grid.n(),
            grid.m(),
            pattern.l_n,
            pattern.l_m
        )));
    }
    let p = *pattern;
    Ok(Frame::with_mask(grid, PilotLayout::Lattice(p), seed, move |n, m| p.is_pilot(n, m)))
}

/// OFDM-style frame: a full pilot column at the first slot of every block.
pub fn build_block_frame(grid: &TFGrid, block_len: usize, seed: u64) -> Result<Frame> {
    if block_len == 0 || !grid.n().is_multiple_of(block_len) {
        return Err(Error::InvalidPattern(format!("block length {block_len} must divide N={}", grid.n())));
    }
    Ok(Frame::with_mask(grid, PilotLayout::Block { block_len }, seed, move |n, _| n % block_len == 0))
}

/// Received frame `Y` with the per-entry noise variance used to generate it.
#[derive(Debug, Clone, PartialEq)]
pub struct RxFrame {
    pub y: TFMatrix,
    pub noise_var: f64,
}

/// `X` shifted by `(δn, δm)` with zero fill: `out[n, m] = X[n − δn, m − δm]`.
pub fn shifted(x: &CMatrix, dn: i32, dm: i32) -> CMatrix {
    let (rows, cols) = (x.rows() as i64, x.cols() as i64);
    CMatrix::from_fn(x.rows(), x.cols(), |n, m| {
        let (sn, sm) = (n as i64 - dn as i64, m as i64 - dm as i64);
        if (0..rows).contains(&sn) && (0..cols).contains(&sm) {
            x[(sn as usize, sm as usize)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Noiseless received frame `Σ_δ X_δ ⊙ H_δ` over the given taps.
///
/// Each path contributes `(t ⊗ f) ⊙ Σ_δ κ_δ X_δ`, so the per-tap matrices are
/// never formed and taps with `κ = 0` cost nothing.
pub fn propagate(frame: &Frame, ch: &DDChannel, pulse: &Pulse, taps: &TapSet) -> CMatrix {
    let grid = *frame.grid();
    let (n_slots, n_sc) = (grid.n(), grid.m());
    let (t, f) = (grid.symbol_duration(), grid.subcarrier_spacing());
    let x = frame.symbols().values();
    let zero = Complex64::new(0.0, 0.0);
    let mut y = CMatrix::zeros(n_slots, n_sc);
    let mut z = CMatrix::zeros(n_slots, n_sc);
    for p in ch.paths() {
        z.as_mut_slice().fill(zero);
        let mut active = false;
        for tap in taps.iter() {
            let k = kappa_path(p, pulse, tap, &grid);
            if k == zero {
                continue;
            }
            active = true;
            let (dn, dm) = (tap.dn as i64, tap.dm as i64);
            let (n0, n1) = (dn.max(0), (n_slots as i64 + dn).min(n_slots as i64));
            let (m0, m1) = (dm.max(0), (n_sc as i64 + dm).min(n_sc as i64));
            if m0 >= m1 {
                continue;
            }
            for n in n0..n1 {
                let src = &x.row((n - dn) as usize)[(m0 - dm) as usize..(m1 - dm) as usize];
                let dst = &mut z.row_mut(n as usize)[m0 as usize..m1 as usize];
                dst.iter_mut().zip(src).for_each(|(d, s)| *d += k * s);
            }
        }
        if !active {
            continue;
        }
        let freq: Vec<Complex64> =
            (0..n_sc).map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 * f * p.delay)).collect();
        for n in 0..n_slots {
            let time = Complex64::from_polar(1.0, 2.0 * PI * n as f64 * t * p.doppler);
            let zr = z.row(n);
            for ((acc, zv), fv) in y.row_mut(n).iter_mut().zip(zr).zip(&freq) {
                *acc += time * fv * zv;
            }
        }
    }
    y
}

/// `Y = X ⊙ H_{0,0} + Σ_{δ≠0} X_δ ⊙ H_δ + W` with `W ~ CN(0, σ²)` i.i.d.
pub fn transmit(frame: &Frame, ch: &DDChannel, pulse: &Pulse, taps: &TapSet, noise_var: f64, seed: u64) -> Result<RxFrame> {
    if !taps.contains(crate::channel::TapIndex::DESIRED) {
        return Err(Error::InvalidArgument("tap set must include (0, 0)".into()));
    }
    if noise_var.is_nan() || noise_var < 0.0 {
        return Err(Error::InvalidArgument(format!("noise variance must be >= 0, got {noise_var}")));
    }
    let mut y = propagate(frame, ch, pulse, taps);
    if noise_var > 0.0 {
        let mut rng = rng_from(seed);
        let sd = (noise_var / 2.0).sqrt();
        for v in y.as_mut_slice() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v += Complex64::new(re, im) * sd;
        }
    }
    Ok(RxFrame { y: TFMatrix::new(*frame.grid(), y)?, noise_var })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Decisions on data positions, row-major order.
    pub decisions: Vec<Complex64>,
    pub errors: usize,
    pub erasures: usize,
    pub ser: f64,
}

/// One-tap zero-forcing equalization and QPSK slicing on the data positions.
/// Entries with `|Ĥ| < 1e-12` are erasures and count as symbol errors.
pub fn equalize_detect(rx: &RxFrame, h_est: &TFMatrix, frame: &Frame) -> Result<Detection> {
    rx.y.values().check_same(h_est.values())?;
    rx.y.values().check_same(frame.symbols().values())?;
    let (y, h, x) = (rx.y.values(), h_est.values(), frame.symbols().values());
    let mut decisions = Vec::new();
    let (mut errors, mut erasures) = (0, 0);
    for (n, m) in frame.data_positions() {
        let hv = h[(n, m)];
        if hv.norm() < 1e-12 {
            erasures += 1;
            errors += 1;
            decisions.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let d = qpsk_slice(y[(n, m)] / hv);
        if (d - x[(n, m)]).norm() > 1e-9 {
            errors += 1;
        }
        decisions.push(d);
    }
    let total = decisions.len().max(1);
    if erasures * 2 > total {
        log::warn!("detection dominated by erasures: {erasures} of {total} data symbols");
    }
    Ok(Detection { decisions, errors, erasures, ser: errors as f64 / total as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_matrix, generate_wssus, TapIndex};

    fn grid(n: usize, m: usize) -> TFGrid {
        TFGrid::from_spacing(200e3, n, m).unwrap()
    }

    #[test]
    fn single_pilot_when_factors_equal_dims() {
        let g = grid(4, 6);
        let p = PilotPattern::new(&g, 4, 6).unwrap();
        let f = build_frame(&g, &p, 1).unwrap();
        assert_eq!(f.pilot_positions().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn lattice_positions_and_fraction() {
        let g = grid(4, 6);
        let p = PilotPattern::new(&g, 2, 3).unwrap();
        let f = build_frame(&g, &p, 1).unwrap();
        assert_eq!(f.pilot_positions().collect::<Vec<_>>(), vec![(0, 0), (0, 3), (2, 0), (2, 3)]);
        assert_eq!(f.pilot_fraction(), p.overhead());
        for (n, m) in f.pilot_positions() {
            assert!((f.symbols().values()[(n, m)].norm() - 1.0).abs() < 1e-15);
        }
        assert!(PilotPattern::new(&g, 3, 3).is_err());
    }

    #[test]
    fn minimal_pattern_covers() {
        let g = grid(64, 64);
        let p = PilotPattern::minimal_for(&g, 1e-6, 18e3).unwrap();
        assert!(p.covers(&g, 1e-6, 18e3));
        assert_eq!((p.n_pilots(), p.m_pilots()), (8, 16));
        assert_eq!(min_pilot_dims(&g, 0.0, 0.0), (2, 2));
    }

    #[test]
    fn flat_channel_scales_symbols() {
        let g = grid(8, 8);
        let pulse = Pulse::rectangular(g.symbol_duration());
        let f = build_frame(&g, &PilotPattern::new(&g, 2, 2).unwrap(), 3).unwrap();
        let alpha = Complex64::new(0.2, -0.9);
        let ch = DDChannel::single(0.0, 0.0, alpha).unwrap();
        let rx = transmit(&f, &ch, &pulse, &TapSet::default_for(8), 0.0, 0).unwrap();
        assert!(rx.y.values().rel_error(&f.symbols().values().scale(1.0).map(|z| z * alpha)) < 1e-14);
    }

    #[test]
    fn desired_tap_only_is_flat_fading() {
        let g = grid(8, 8);
        let pulse = Pulse::rectangular(g.symbol_duration());
        let f = build_frame(&g, &PilotPattern::new(&g, 2, 2).unwrap(), 3).unwrap();
        let ch = generate_wssus(1e-6, 2e4, 4, 5).unwrap();
        let rx = transmit(&f, &ch, &pulse, &TapSet::desired_only(), 0.0, 0).unwrap();
        let h = channel_matrix(&ch, &pulse, &g, TapIndex::DESIRED);
        assert!(rx.y.values().rel_error(&f.symbols().values().hadamard(h.values()).unwrap()) < 1e-14);
        assert!(transmit(&f, &ch, &pulse, &TapSet::from_taps(vec![TapIndex::new(1, 0)]), 0.0, 0).is_err());
    }

    #[test]
    fn propagate_matches_per_tap_sum() {
        let g = grid(8, 12);
        let pulse = Pulse::rectangular(g.symbol_duration());
        let ch = generate_wssus(1e-6, 20e3, 5, 3).unwrap();
        let p = PilotPattern::new(&g, 2, 3).unwrap();
        let f = build_frame(&g, &p, 4).unwrap();
        let taps = TapSet::truncated(2, 5);
        let mut want = CMatrix::zeros(8, 12);
        for tap in taps.iter() {
            let h = channel_matrix(&ch, &pulse, &g, tap);
            let xs = shifted(f.symbols().values(), tap.dn, tap.dm);
            want = &want + &xs.hadamard(h.values()).unwrap();
        }
        let got = propagate(&f, &ch, &pulse, &taps);
        assert!(got.rel_error(&want) < 1e-13);
    }

    #[test]
    fn shift_zero_fills() {
        let x = CMatrix::from_fn(3, 3, |r, c| Complex64::new((r * 3 + c) as f64, 0.0));
        let s = shifted(&x, 1, -1);
        assert_eq!(s[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(s[(1, 0)], x[(0, 1)]);
        assert_eq!(s[(2, 2)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn perfect_csi_detects_everything() {
        let g = grid(8, 8);
        let pulse = Pulse::rectangular(g.symbol_duration());
        let f = build_frame(&g, &PilotPattern::new(&g, 2, 2).unwrap(), 3).unwrap();
        let ch = generate_wssus(1e-6, 2e4, 4, 5).unwrap();
        let rx = transmit(&f, &ch, &pulse, &TapSet::desired_only(), 0.0, 0).unwrap();
        let h = channel_matrix(&ch, &pulse, &g, TapIndex::DESIRED);
        let det = equalize_detect(&rx, &h, &f).unwrap();
        assert_eq!(det.ser, 0.0);
        assert_eq!(det.decisions.len(), 48);
    }

    #[test]
    fn zero_estimate_is_all_erasures() {
        let g = grid(4, 4);
        let f = build_frame(&g, &PilotPattern::new(&g, 2, 2).unwrap(), 3).unwrap();
        let rx = RxFrame { y: f.symbols().clone(), noise_var: 0.0 };
        let det = equalize_detect(&rx, &TFMatrix::zeros(g), &f).unwrap();
        assert_eq!((det.erasures, det.ser), (12, 1.0));
    }
}
