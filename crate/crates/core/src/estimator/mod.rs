//! CSI acquisition from pilots: least squares at the pilot lattice, SFFT
//! interpolation to the full frame, pipelined and data-aided variants, an
//! OFDM block-pilot baseline, and the error decomposition of the interpolator.

mod baseline;
mod decompose;
mod extrapolate;
mod pipeline;

pub use baseline::ofdm_baseline_estimate;
pub use decompose::{decompose_error, ErrorDecomposition, ErrorPowers};
pub use extrapolate::{extrapolate, predict_slot, DataAidedTracker, TrackStep};
pub use pipeline::{PipelineOutput, PipelineState};

use num_complex::Complex64;

use crate::error::{dims, Error, Result};
use crate::matrix::CMatrix;
use crate::modem::{Frame, PilotLayout, PilotPattern, RxFrame};
use crate::transforms::{isfft, sfft, PhaseRamp, TFGrid, TFMatrix, DEFAULT_DELAY_SHIFT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Batch,
    Pipelined,
    Extrapolated,
    OfdmBaseline,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Batch => "batch",
            Method::Pipelined => "pipelined",
            Method::Extrapolated => "extrapolated",
            Method::OfdmBaseline => "ofdm-baseline",
        }
    }
}

/// LS estimates `Ĥ̆ = Y̆ ⊘ X̆` on the `N̆ × M̆` pilot lattice of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservation {
    pub pilots: CMatrix,
    pub pattern: PilotPattern,
    /// Window grid (`N` slots, `M` sub-carriers).
    pub grid: TFGrid,
    /// Absolute slot of the window's first row.
    pub window_start: usize,
}

impl PilotObservation {
    pub fn new(pilots: CMatrix, pattern: PilotPattern, grid: TFGrid, window_start: usize) -> Result<Self> {
        if pilots.shape() != (pattern.n_pilots(), pattern.m_pilots()) {
            return Err(Error::DimensionMismatch {
                expected: dims(pattern.n_pilots(), pattern.m_pilots()),
                got: dims(pilots.rows(), pilots.cols()),
            });
        }
        if grid.n() != pattern.n_pilots() * pattern.l_n() || grid.m() != pattern.m_pilots() * pattern.l_m() {
            return Err(Error::InvalidPattern("pattern does not tile the window grid".into()));
        }
        Ok(Self { pilots, pattern, grid, window_start })
    }
}

/// Full-window CSI.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiEstimate {
    pub h: TFMatrix,
    pub window_start: usize,
    pub method: Method,
}

impl CsiEstimate {
    /// Column of estimates at an absolute slot, if inside the window.
    pub fn slot(&self, absolute: usize) -> Option<&[Complex64]> {
        let local = absolute.checked_sub(self.window_start)?;
        (local < self.h.grid().n()).then(|| self.h.values().row(local))
    }

    pub fn window_end(&self) -> usize {
        self.window_start + self.h.grid().n()
    }
}

fn lattice_pattern(frame: &Frame) -> Result<PilotPattern> {
    match frame.layout() {
        PilotLayout::Lattice(p) => Ok(p),
        PilotLayout::Block { .. } => Err(Error::InvalidPattern("frame carries block pilots, not a lattice".into())),
    }
}

/// One pilot column `Y[slot, m̆L_M] / X[slot, m̆L_M]`.
pub fn ls_pilot_column(rx: &RxFrame, frame: &Frame, pattern: &PilotPattern, slot: usize) -> Result<Vec<Complex64>> {
    rx.y.values().check_same(frame.symbols().values())?;
    if !slot.is_multiple_of(pattern.l_n()) || slot >= frame.grid().n() {
        return Err(Error::InvalidArgument(format!("slot {slot} does not carry pilots")));
    }
    (0..pattern.m_pilots())
        .map(|b| {
            let m = b * pattern.l_m();
            if !frame.is_pilot(slot, m) {
                return Err(Error::InvalidPattern(format!("({slot}, {m}) is not a pilot position in the frame")));
            }
            let x = frame.symbols().values()[(slot, m)];
            if x.norm() == 0.0 {
                return Err(Error::InvalidArgument(format!("zero pilot symbol at ({slot}, {m})")));
            }
            Ok(rx.y.values()[(slot, m)] / x)
        })
        .collect()
}

/// LS pilot observation for the window `[window_start, window_start + N)` of a
/// (possibly longer) received stream.
pub fn ls_window(rx: &RxFrame, frame: &Frame, pattern: &PilotPattern, window: &TFGrid, window_start: usize) -> Result<PilotObservation> {
    if !window_start.is_multiple_of(pattern.l_n()) || window_start + window.n() > frame.grid().n() {
        return Err(Error::InvalidArgument(format!("window start {window_start} not aligned or out of range")));
    }
    let mut pilots = CMatrix::zeros(pattern.n_pilots(), pattern.m_pilots());
    for a in 0..pattern.n_pilots() {
        let col = ls_pilot_column(rx, frame, pattern, window_start + a * pattern.l_n())?;
        pilots.row_mut(a).copy_from_slice(&col);
    }
    PilotObservation::new(pilots, *pattern, *window, window_start)
}

/// LS estimates at the lattice pilots of a single-window frame.
pub fn ls_pilot_estimate(rx: &RxFrame, frame: &Frame, pattern: &PilotPattern) -> Result<PilotObservation> {
    let framed = lattice_pattern(frame)?;
    if framed != *pattern {
        return Err(Error::InvalidPattern("frame pilots were placed with a different pattern".into()));
    }
    ls_window(rx, frame, pattern, frame.grid(), 0)
}

/// Linear map from an `N̆ × M̆` pilot matrix to the `N × M` T-F estimate:
/// phase-rotate the samples, SFFT to the `M̆ × N̆` D-D corner, zero-pad and
/// inverse-SFFT to `M × N`, then undo the rotation.
pub(crate) fn reconstruct(pilots: &CMatrix, grid: &TFGrid, pattern: &PilotPattern, delay_shift: usize) -> Result<CMatrix> {
    let (np, mp) = (pattern.n_pilots(), pattern.m_pilots());
    if np % 2 != 0 {
        return Err(Error::OddPilotCount(np));
    }
    if pilots.shape() != (np, mp) {
        return Err(Error::DimensionMismatch { expected: dims(np, mp), got: dims(pilots.rows(), pilots.cols()) });
    }
    let (l_n, l_m) = (pattern.l_n(), pattern.l_m());
    let ramp = PhaseRamp::new(grid, np, delay_shift);
    let rotated = CMatrix::from_fn(np, mp, |a, b| pilots[(a, b)] * ramp.factor(a * l_n, b * l_m));
    let gain = (grid.n() * grid.m()) as f64 / (np * mp) as f64;
    let corner = sfft(&rotated, np, mp)?.scale(gain);
    let full = isfft(&corner, grid.n(), grid.m())?;
    Ok(CMatrix::from_fn(grid.n(), grid.m(), |n, m| full[(n, m)] * ramp.factor(n, m).conj()))
}

/// SFFT interpolation of a pilot observation to the full window.
pub fn interpolate(obs: &PilotObservation) -> Result<CsiEstimate> {
    interpolate_with(obs, DEFAULT_DELAY_SHIFT)
}

pub fn interpolate_with(obs: &PilotObservation, delay_shift: usize) -> Result<CsiEstimate> {
    let values = reconstruct(&obs.pilots, &obs.grid, &obs.pattern, delay_shift)?;
    Ok(CsiEstimate { h: TFMatrix::new(obs.grid, values)?, window_start: obs.window_start, method: Method::Batch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_matrix, generate_wssus, DDChannel, Pulse, TapIndex, TapSet};
    use crate::metrics::nmse_db;
    use crate::modem::{build_frame, transmit};

    fn setup(n: usize, m: usize, l: usize) -> (TFGrid, PilotPattern, Pulse) {
        let g = TFGrid::from_spacing(15e3, n, m).unwrap();
        (g, PilotPattern::new(&g, l, l).unwrap(), Pulse::rectangular(g.symbol_duration()))
    }

    #[test]
    fn ls_is_exact_without_noise_or_isci() {
        let (g, p, pulse) = setup(16, 16, 4);
        let ch = generate_wssus(0.1 * g.symbol_duration(), 0.1 * g.subcarrier_spacing(), 4, 1).unwrap();
        let f = build_frame(&g, &p, 2).unwrap();
        let rx = transmit(&f, &ch, &pulse, &TapSet::desired_only(), 0.0, 0).unwrap();
        let obs = ls_pilot_estimate(&rx, &f, &p).unwrap();
        let h = channel_matrix(&ch, &pulse, &g, TapIndex::DESIRED);
        for a in 0..4 {
            for b in 0..4 {
                assert!((obs.pilots[(a, b)] - h.values()[(4 * a, 4 * b)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn all_ones_pilots_return_received_samples() {
        let (g, p, _) = setup(8, 8, 2);
        let f = build_frame(&g, &p, 2).unwrap();
        let ones = CMatrix::from_elem(8, 8, Complex64::new(1.0, 0.0));
        let f = f.with_symbols(ones).unwrap();
        let y = CMatrix::from_fn(8, 8, |n, m| Complex64::new(n as f64, m as f64));
        let rx = RxFrame { y: TFMatrix::new(g, y.clone()).unwrap(), noise_var: 0.0 };
        let obs = ls_pilot_estimate(&rx, &f, &p).unwrap();
        assert_eq!(obs.pilots[(1, 2)], y[(2, 4)]);
    }

    #[test]
    fn exact_recovery_on_grid() {
        let (g, p, pulse) = setup(64, 64, 4);
        let ch = DDChannel::single(3.0 / g.bandwidth(), 5.0 / g.frame_length(), Complex64::new(0.8, 0.6)).unwrap();
        let f = build_frame(&g, &p, 4).unwrap();
        let rx = transmit(&f, &ch, &pulse, &TapSet::desired_only(), 0.0, 0).unwrap();
        let est = interpolate(&ls_pilot_estimate(&rx, &f, &p).unwrap()).unwrap();
        let h = channel_matrix(&ch, &pulse, &g, TapIndex::DESIRED);
        let err = est.h.values().dist_sqr(h.values()) / h.values().norm_sqr();
        assert!(err < 1e-20, "nmse {err}");
    }

    #[test]
    fn zero_channel_gives_zero_estimate() {
        let (g, p, _) = setup(16, 16, 4);
        let obs = PilotObservation::new(CMatrix::zeros(4, 4), p, g, 0).unwrap();
        assert_eq!(interpolate(&obs).unwrap().h.values().max_abs(), 0.0);
    }

    #[test]
    fn estimate_reproduces_pilots() {
        let (g, _, _) = setup(16, 24, 4);
        let p = PilotPattern::new(&g, 4, 3).unwrap();
        let mut rng = crate::rng::rng_from(8);
        use rand::Rng;
        let pilots = CMatrix::from_fn(4, 8, |_, _| Complex64::new(rng.random(), rng.random()));
        let est = interpolate(&PilotObservation::new(pilots.clone(), p, g, 0).unwrap()).unwrap();
        for a in 0..4 {
            for b in 0..8 {
                assert!((est.h.values()[(4 * a, 3 * b)] - pilots[(a, b)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn off_grid_error_decays_with_window() {
        let mut last = f64::INFINITY;
        for n in [32usize, 64, 128] {
            let (g, p, pulse) = setup(n, n, 4);
            let ch = DDChannel::single(3.5 / g.bandwidth(), 5.5 / g.frame_length(), Complex64::new(1.0, 0.0)).unwrap();
            let f = build_frame(&g, &p, 4).unwrap();
            let rx = transmit(&f, &ch, &pulse, &TapSet::desired_only(), 0.0, 0).unwrap();
            let est = interpolate(&ls_pilot_estimate(&rx, &f, &p).unwrap()).unwrap();
            let h = channel_matrix(&ch, &pulse, &g, TapIndex::DESIRED);
            let e = nmse_db(&est.h, &h).unwrap();
            assert!(e < last, "n={n}: {e} dB not below {last} dB");
            last = e;
        }
    }

    #[test]
    fn odd_pilot_count_is_rejected() {
        let g = TFGrid::from_spacing(15e3, 6, 4).unwrap();
        let p = PilotPattern::new(&g, 2, 2).unwrap();
        let obs = PilotObservation::new(CMatrix::zeros(3, 2), p, g, 0).unwrap();
        assert!(matches!(interpolate(&obs), Err(Error::OddPilotCount(3))));
    }
}
