use num_complex::Complex64;

use super::{interpolate, CsiEstimate, Method, PilotObservation};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::modem::PilotPattern;

/// Re-run the interpolator on previously estimated CSI taken at slots
/// `shift + L_N·{0..N̆−1}` and sub-carriers `m̆·L_M`, which yields CSI for the
/// window shifted by `shift` slots, i.e. a prediction of up to `shift` slots
/// beyond the source window.
pub fn extrapolate(source: &CsiEstimate, pattern: &PilotPattern, shift: usize) -> Result<CsiEstimate> {
    let grid = *source.h.grid();
    if shift >= pattern.l_n() {
        return Err(Error::InsufficientHistory(format!(
            "shift {shift} needs source slots beyond the window (L_N = {})",
            pattern.l_n()
        )));
    }
    let v = source.h.values();
    let pilots = CMatrix::from_fn(pattern.n_pilots(), pattern.m_pilots(), |a, b| {
        v[(shift + a * pattern.l_n(), b * pattern.l_m())]
    });
    let obs = PilotObservation::new(pilots, *pattern, grid, source.window_start + shift)?;
    let mut est = interpolate(&obs)?;
    est.method = Method::Extrapolated;
    Ok(est)
}

/// Predicted CSI column at absolute slot `target` (at or past the end of the
/// source window). With `averaging`, every admissible shift `1..L_N−1` whose
/// window reaches `target` contributes and the predictions are averaged;
/// otherwise the smallest such shift is used.
pub fn predict_slot(source: &CsiEstimate, pattern: &PilotPattern, target: usize, averaging: bool) -> Result<Vec<Complex64>> {
    let n = source.h.grid().n();
    let min_shift = (target + 1).saturating_sub(source.window_start + n).max(1);
    if target < source.window_start || min_shift >= pattern.l_n() {
        return Err(Error::InsufficientHistory(format!(
            "slot {target} cannot be predicted from window [{}, {}) with L_N = {}",
            source.window_start,
            source.window_end(),
            pattern.l_n()
        )));
    }
    let shifts: Vec<usize> = if averaging { (min_shift..pattern.l_n()).collect() } else { vec![min_shift] };
    let mut acc = vec![Complex64::new(0.0, 0.0); source.h.grid().m()];
    for &s in &shifts {
        let est = extrapolate(source, pattern, s)?;
        let col = est.slot(target).expect("shift window covers target");
        acc.iter_mut().zip(col).for_each(|(a, b)| *a += b);
    }
    let k = shifts.len() as f64;
    Ok(acc.into_iter().map(|z| z / k).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrackStep {
    Extrapolated(CsiEstimate),
    /// The data-aided run has reached its restart budget; anchor on fresh pilots.
    NeedsPilots,
}

/// Data-aided channel tracking: each step extrapolates the current window by
/// `L_N − 1` slots; after `restart_every` steps without fresh pilots it asks
/// for re-anchoring to bound error propagation.
#[derive(Debug, Clone)]
pub struct DataAidedTracker {
    pattern: PilotPattern,
    restart_every: usize,
    current: Option<CsiEstimate>,
    steps_since_anchor: usize,
}

impl DataAidedTracker {
    pub const DEFAULT_RESTART: usize = 4;

    pub fn new(pattern: PilotPattern, restart_every: usize) -> Result<Self> {
        if pattern.l_n() < 2 {
            return Err(Error::InvalidPattern("tracking needs L_N >= 2".into()));
        }
        if restart_every == 0 {
            return Err(Error::InvalidArgument("restart period must be >= 1".into()));
        }
        Ok(Self { pattern, restart_every, current: None, steps_since_anchor: 0 })
    }

    pub fn anchor(&mut self, estimate: CsiEstimate) {
        self.current = Some(estimate);
        self.steps_since_anchor = 0;
    }

    pub fn current(&self) -> Option<&CsiEstimate> {
        self.current.as_ref()
    }

    pub fn step(&mut self) -> Result<TrackStep> {
        let Some(cur) = &self.current else {
            return Err(Error::InsufficientHistory("tracker has not been anchored".into()));
        };
        if self.steps_since_anchor >= self.restart_every {
            return Ok(TrackStep::NeedsPilots);
        }
        let next = extrapolate(cur, &self.pattern, self.pattern.l_n() - 1)?;
        self.current = Some(next.clone());
        self.steps_since_anchor += 1;
        Ok(TrackStep::Extrapolated(next))
    }
}
