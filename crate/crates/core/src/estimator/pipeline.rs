use std::collections::VecDeque;

use num_complex::Complex64;

use super::{interpolate, CsiEstimate, Method, PilotObservation};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::modem::PilotPattern;
use crate::transforms::TFGrid;

/// Sliding-window interpolator: keeps the last `N̆` pilot columns and emits
/// CSI for `[n₀ − (N̆−1)L_N, n₀ − (N̆−1)L_N + N)` when the column at slot `n₀`
/// arrives. One stream per instance.
#[derive(Debug, Clone)]
pub struct PipelineState {
    window: TFGrid,
    pattern: PilotPattern,
    buffer: VecDeque<(usize, Vec<Complex64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineOutput {
    WarmingUp { buffered: usize, needed: usize },
    Estimate(CsiEstimate),
}

impl PipelineState {
    pub fn new(window: TFGrid, pattern: PilotPattern) -> Result<Self> {
        if window.n() != pattern.n_pilots() * pattern.l_n() || window.m() != pattern.m_pilots() * pattern.l_m() {
            return Err(Error::InvalidPattern("pattern does not tile the pipeline window".into()));
        }
        Ok(Self { window, pattern, buffer: VecDeque::with_capacity(pattern.n_pilots()) })
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_full(&self) -> bool {
        self.buffer.len() == self.pattern.n_pilots()
    }

    /// Insert the LS pilot column received at absolute `slot`.
    pub fn push(&mut self, slot: usize, column: Vec<Complex64>) -> Result<PipelineOutput> {
        if column.len() != self.pattern.m_pilots() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} pilot sub-carriers", self.pattern.m_pilots()),
                got: format!("{}", column.len()),
            });
        }
        if let Some(&(last, _)) = self.buffer.back() {
            if slot != last + self.pattern.l_n() {
                return Err(Error::InvalidArgument(format!(
                    "pilot slot {slot} does not follow {last} at spacing {}",
                    self.pattern.l_n()
                )));
            }
        }
        if self.is_full() {
            self.buffer.pop_front();
        }
        self.buffer.push_back((slot, column));
        if !self.is_full() {
            return Ok(PipelineOutput::WarmingUp { buffered: self.buffer.len(), needed: self.pattern.n_pilots() });
        }
        let start = self.buffer[0].0;
        let mut pilots = CMatrix::zeros(self.pattern.n_pilots(), self.pattern.m_pilots());
        for (a, (_, col)) in self.buffer.iter().enumerate() {
            pilots.row_mut(a).copy_from_slice(col);
        }
        let obs = PilotObservation::new(pilots, self.pattern, self.window, start)?;
        let mut est = interpolate(&obs)?;
        est.method = Method::Pipelined;
        Ok(PipelineOutput::Estimate(est))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig7_window_after_third_pilot() {
        let g = TFGrid::from_spacing(15e3, 4, 6).unwrap();
        let p = PilotPattern::new(&g, 2, 3).unwrap();
        let mut state = PipelineState::new(g, p).unwrap();
        let col = vec![Complex64::new(1.0, 0.0); 2];
        assert!(matches!(state.push(0, col.clone()).unwrap(), PipelineOutput::WarmingUp { buffered: 1, needed: 2 }));
        let PipelineOutput::Estimate(first) = state.push(2, col.clone()).unwrap() else { panic!() };
        assert_eq!((first.window_start, first.window_end()), (0, 4));
        let PipelineOutput::Estimate(second) = state.push(4, col).unwrap() else { panic!() };
        assert_eq!((second.window_start, second.window_end()), (2, 6));
        assert!(second.slot(5).is_some() && second.slot(1).is_none());
    }

    #[test]
    fn rejects_gaps_and_wrong_width() {
        let g = TFGrid::from_spacing(15e3, 4, 6).unwrap();
        let p = PilotPattern::new(&g, 2, 3).unwrap();
        let mut state = PipelineState::new(g, p).unwrap();
        state.push(0, vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        assert!(state.push(6, vec![Complex64::new(1.0, 0.0); 2]).is_err());
        assert!(state.push(2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }
}
