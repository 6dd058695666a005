//! Discrete transforms between the time-frequency (T-F) and delay-Doppler
//! (D-D) domains, the finite-window kernels and the circular/phase rotations.
//!
//! Orientation: T-F matrices are `N × M` (time slot × sub-carrier), D-D
//! matrices are `M × N` (delay bin × Doppler bin). The forward symplectic
//! transform is
//!
//! ```text
//! out[m̃, ñ] = Σ_{n,m} A[n, m] · exp(−j2π (n·ñ/N − m·m̃/M))
//! ```
//!
//! so a path at delay `k/B` and Doppler `l/S` lands on D-D bin `(k, l)`.
//! The forward direction is unnormalized; [`isfft`] carries `1/(N·M)`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{dims, Error, Result};
use crate::matrix::CMatrix;

/// Weyl-Heisenberg lattice: `N` slots of duration `T`, `M` sub-carriers spaced `F`, with `T·F = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TFGrid {
    t: f64,
    f: f64,
    n: usize,
    m: usize,
}

impl TFGrid {
    pub fn new(symbol_duration: f64, subcarrier_spacing: f64, n: usize, m: usize) -> Result<Self> {
        if !(symbol_duration > 0.0 && symbol_duration.is_finite()) {
            return Err(Error::InvalidGrid(format!("T must be positive, got {symbol_duration}")));
        }
        if !(subcarrier_spacing > 0.0 && subcarrier_spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!("F must be positive, got {subcarrier_spacing}")));
        }
        if n < 2 || m < 2 {
            return Err(Error::InvalidGrid(format!("need N >= 2 and M >= 2, got N={n}, M={m}")));
        }
        let tf = symbol_duration * subcarrier_spacing;
        if (tf - 1.0).abs() > f64::EPSILON {
            return Err(Error::InvalidGrid(format!("T*F must equal 1, got {tf:.17}")));
        }
        Ok(Self { t: symbol_duration, f: subcarrier_spacing, n, m })
    }

    pub fn from_spacing(subcarrier_spacing: f64, n: usize, m: usize) -> Result<Self> {
        Self::new(1.0 / subcarrier_spacing, subcarrier_spacing, n, m)
    }

    /// Grid with `T/F = τ_D/ν_D`, the rectangular-pulse matching rule.
    pub fn matched_to_spreads(tau_d: f64, nu_d: f64, n: usize, m: usize) -> Result<Self> {
        if !(tau_d > 0.0 && nu_d > 0.0) {
            return Err(Error::InvalidGrid("matched grid needs positive spreads".into()));
        }
        let t = (tau_d / nu_d).sqrt();
        Self::new(t, 1.0 / t, n, m)
    }

    pub fn with_dims(&self, n: usize, m: usize) -> Result<Self> {
        Self::new(self.t, self.f, n, m)
    }

    pub fn symbol_duration(&self) -> f64 {
        self.t
    }
    pub fn subcarrier_spacing(&self) -> f64 {
        self.f
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    /// Frame length `S = N·T`.
    pub fn frame_length(&self) -> f64 {
        self.n as f64 * self.t
    }
    /// Bandwidth `B = M·F`.
    pub fn bandwidth(&self) -> f64 {
        self.m as f64 * self.f
    }
    pub fn bs(&self) -> f64 {
        self.bandwidth() * self.frame_length()
    }
}

/// Channel or signal on the T-F grid, indexed `[n, m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TFMatrix {
    grid: TFGrid,
    values: CMatrix,
}

impl TFMatrix {
    pub fn new(grid: TFGrid, values: CMatrix) -> Result<Self> {
        if values.shape() != (grid.n(), grid.m()) {
            return Err(Error::DimensionMismatch {
                expected: dims(grid.n(), grid.m()),
                got: dims(values.rows(), values.cols()),
            });
        }
        if !values.is_finite() {
            return Err(Error::InvalidArgument("T-F matrix has non-finite entries".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TFGrid) -> Self {
        Self { grid, values: CMatrix::zeros(grid.n(), grid.m()) }
    }

    pub fn grid(&self) -> &TFGrid {
        &self.grid
    }
    pub fn values(&self) -> &CMatrix {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut CMatrix {
        &mut self.values
    }
    pub fn into_values(self) -> CMatrix {
        self.values
    }
}

/// Channel or signal on the D-D grid, indexed `[m̃, ñ]` (delay `m̃/B`, Doppler `ñ/S`).
#[derive(Debug, Clone, PartialEq)]
pub struct DDMatrix {
    grid: TFGrid,
    values: CMatrix,
}

impl DDMatrix {
    pub fn new(grid: TFGrid, values: CMatrix) -> Result<Self> {
        if values.shape() != (grid.m(), grid.n()) {
            return Err(Error::DimensionMismatch {
                expected: dims(grid.m(), grid.n()),
                got: dims(values.rows(), values.cols()),
            });
        }
        if !values.is_finite() {
            return Err(Error::InvalidArgument("D-D matrix has non-finite entries".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TFGrid {
        &self.grid
    }
    pub fn values(&self) -> &CMatrix {
        &self.values
    }
    pub fn into_values(self) -> CMatrix {
        self.values
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Transform every row in place.
fn fft_rows(a: &mut CMatrix, inverse: bool) {
    let fft = plan(a.cols(), inverse);
    fft.process(a.as_mut_slice());
}

fn pad(a: &CMatrix, rows: usize, cols: usize) -> CMatrix {
    let mut out = CMatrix::zeros(rows, cols);
    for r in 0..a.rows() {
        out.row_mut(r)[..a.cols()].copy_from_slice(a.row(r));
    }
    out
}

/// Forward symplectic FFT of a `P × Q` T-F array, zero-padded to `out_n × out_m`.
/// Returns the `out_m × out_n` D-D array.
pub fn sfft(a: &CMatrix, out_n: usize, out_m: usize) -> Result<CMatrix> {
    if a.rows() > out_n || a.cols() > out_m || out_n == 0 || out_m == 0 {
        return Err(Error::DimensionMismatch {
            expected: format!("at most {}", dims(out_n, out_m)),
            got: dims(a.rows(), a.cols()),
        });
    }
    // +j exponent along frequency (rows of the T-F array)
    let mut z = pad(a, out_n, out_m);
    fft_rows(&mut z, true);
    // −j exponent along time, done on the transposed array
    let mut zt = z.transpose();
    fft_rows(&mut zt, false);
    Ok(zt)
}

/// Inverse symplectic FFT: `M' × N'` D-D array (zero-padded to `M × N`) to the
/// `N × M` T-F array, with `1/(N·M)` normalization.
pub fn isfft(dd: &CMatrix, n: usize, m: usize) -> Result<CMatrix> {
    if dd.rows() > m || dd.cols() > n || n == 0 || m == 0 {
        return Err(Error::DimensionMismatch {
            expected: format!("at most {}", dims(m, n)),
            got: dims(dd.rows(), dd.cols()),
        });
    }
    let mut z = pad(dd, m, n);
    fft_rows(&mut z, true);
    let mut zt = z.transpose();
    fft_rows(&mut zt, false);
    let scale = 1.0 / (n * m) as f64;
    zt.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
    Ok(zt)
}

/// Periodic sinc `sin(Kω/2) / (K sin(ω/2))`.
pub fn diric(k: usize, omega: f64) -> f64 {
    assert!(k >= 1, "diric order must be >= 1");
    // reduce to ε = ω − 2πt so the ratio stays well conditioned near the peaks
    let turns = (omega / (2.0 * PI)).round();
    let eps = omega - 2.0 * PI * turns;
    let kf = k as f64;
    let sign = if ((k as i64 - 1) * turns as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let s = (eps / 2.0).sin();
    if s.abs() < 1e-9 {
        return sign * (1.0 - (kf * kf - 1.0) * eps * eps / 24.0);
    }
    sign * (kf * eps / 2.0).sin() / (kf * s)
}

/// `sin(π·len·x) / (π x)`, continuous at `x = 0` where it equals `len`.
fn sinc_len(len: f64, x: f64) -> f64 {
    let arg = PI * len * x;
    if arg.abs() < 1e-6 {
        return len * (1.0 - arg * arg / 6.0);
    }
    arg.sin() / (PI * x)
}

/// D-D image of the rectangular `NT × MF` T-F window (2D sinc with linear phase).
pub fn window_w(grid: &TFGrid, tau: f64, nu: f64) -> Complex64 {
    let (t, f) = (grid.symbol_duration(), grid.subcarrier_spacing());
    let (n, m) = (grid.n() as f64, grid.m() as f64);
    let mag = sinc_len(n * t, nu) * sinc_len(m * f, tau);
    let phase = -PI * ((n - 1.0) * t * nu - (m - 1.0) * f * tau);
    Complex64::from_polar(1.0, phase) * mag
}

/// Periodic extension of [`window_w`] normalized by `1/(M·N)`: the Dirichlet product.
pub fn periodic_window(grid: &TFGrid, tau: f64, nu: f64) -> Complex64 {
    let (t, f) = (grid.symbol_duration(), grid.subcarrier_spacing());
    let (n, m) = (grid.n(), grid.m());
    let doppler = diric(n, 2.0 * PI * t * nu)
        * Complex64::from_polar(1.0, -PI * (n as f64 - 1.0) * t * nu);
    let delay = diric(m, 2.0 * PI * f * tau)
        * Complex64::from_polar(1.0, PI * (m as f64 - 1.0) * f * tau);
    doppler * delay
}

/// `out[r, c] = in[(r − dr) mod R, (c − dc) mod C]`.
pub fn circular_shift(a: &CMatrix, dr: i64, dc: i64) -> CMatrix {
    let (rows, cols) = (a.rows() as i64, a.cols() as i64);
    CMatrix::from_fn(a.rows(), a.cols(), |r, c| {
        let sr = (r as i64 - dr).rem_euclid(rows) as usize;
        let sc = (c as i64 - dc).rem_euclid(cols) as usize;
        a[(sr, sc)]
    })
}

fn check_even(n_pilots: usize) -> Result<()> {
    if !n_pilots.is_multiple_of(2) {
        return Err(Error::OddPilotCount(n_pilots));
    }
    Ok(())
}

/// Default one-bin delay shift of the rotation.
pub const DEFAULT_DELAY_SHIFT: usize = 1;

/// Rotate a D-D response so the support sits in the `[0, M̆) × [0, N̆)` corner:
/// `out[m, n] = in[(m − 1) mod M, (n − N̆/2) mod N]`.
pub fn rotate_dd(h: &DDMatrix, n_pilots: usize) -> Result<DDMatrix> {
    rotate_dd_with(h, n_pilots, DEFAULT_DELAY_SHIFT)
}

pub fn rotate_dd_with(h: &DDMatrix, n_pilots: usize, delay_shift: usize) -> Result<DDMatrix> {
    check_even(n_pilots)?;
    if n_pilots > h.grid().n() {
        return Err(Error::InvalidArgument(format!("N̆={n_pilots} exceeds N={}", h.grid().n())));
    }
    let values = circular_shift(h.values(), delay_shift as i64, (n_pilots / 2) as i64);
    Ok(DDMatrix { grid: *h.grid(), values })
}

pub fn derotate_dd(h: &DDMatrix, n_pilots: usize) -> Result<DDMatrix> {
    derotate_dd_with(h, n_pilots, DEFAULT_DELAY_SHIFT)
}

pub fn derotate_dd_with(h: &DDMatrix, n_pilots: usize, delay_shift: usize) -> Result<DDMatrix> {
    check_even(n_pilots)?;
    let values = circular_shift(h.values(), -(delay_shift as i64), -((n_pilots / 2) as i64));
    Ok(DDMatrix { grid: *h.grid(), values })
}

/// Phase factors `e^{j n ω_N}` (time) and `e^{−j m ω_M}` (frequency) with
/// `ω_N = π N̆ / N` and `ω_M = 2π·shift / M`. Evaluated at absolute indices so the
/// same ramps can be sampled at pilot positions.
#[derive(Debug, Clone, Copy)]
pub struct PhaseRamp {
    omega_n: f64,
    omega_m: f64,
}

impl PhaseRamp {
    pub fn new(grid: &TFGrid, n_pilots: usize, delay_shift: usize) -> Self {
        Self {
            omega_n: PI * n_pilots as f64 / grid.n() as f64,
            omega_m: 2.0 * PI * delay_shift as f64 / grid.m() as f64,
        }
    }

    /// Combined factor for slot `n`, sub-carrier `m`.
    pub fn factor(&self, n: usize, m: usize) -> Complex64 {
        Complex64::from_polar(1.0, n as f64 * self.omega_n - m as f64 * self.omega_m)
    }
}

/// `out[n, m] = e^{j n ω_N} · H[n, m] · e^{−j m ω_M}`, the T-F counterpart of [`rotate_dd`].
pub fn phase_rotate_tf(h: &TFMatrix, n_pilots: usize) -> TFMatrix {
    phase_rotate_tf_with(h, n_pilots, DEFAULT_DELAY_SHIFT)
}

pub fn phase_rotate_tf_with(h: &TFMatrix, n_pilots: usize, delay_shift: usize) -> TFMatrix {
    let ramp = PhaseRamp::new(h.grid(), n_pilots, delay_shift);
    let v = h.values();
    TFMatrix { grid: h.grid, values: CMatrix::from_fn(v.rows(), v.cols(), |n, m| v[(n, m)] * ramp.factor(n, m)) }
}

pub fn phase_derotate_tf(h: &TFMatrix, n_pilots: usize) -> TFMatrix {
    phase_derotate_tf_with(h, n_pilots, DEFAULT_DELAY_SHIFT)
}

pub fn phase_derotate_tf_with(h: &TFMatrix, n_pilots: usize, delay_shift: usize) -> TFMatrix {
    let ramp = PhaseRamp::new(h.grid(), n_pilots, delay_shift);
    let v = h.values();
    TFMatrix {
        grid: h.grid,
        values: CMatrix::from_fn(v.rows(), v.cols(), |n, m| v[(n, m)] * ramp.factor(n, m).conj()),
    }
}

/// SFFT of a full T-F matrix into its D-D matrix.
pub fn to_dd(h: &TFMatrix) -> DDMatrix {
    let g = *h.grid();
    let values = sfft(h.values(), g.n(), g.m()).expect("T-F matrix matches its grid");
    DDMatrix { grid: g, values }
}

pub fn to_tf(h: &DDMatrix) -> TFMatrix {
    let g = *h.grid();
    let values = isfft(h.values(), g.n(), g.m()).expect("D-D matrix matches its grid");
    TFMatrix { grid: g, values }
}
