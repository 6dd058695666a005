use num_complex::Complex64;

use super::reconstruct;
use crate::channel::{channel_matrix, channel_sample, DDChannel, Pulse, TapIndex, TapSet};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::modem::{Frame, PilotPattern, RxFrame};
use crate::transforms::{isfft, rotate_dd_with, to_dd, DDMatrix, PhaseRamp, TFMatrix, DEFAULT_DELAY_SHIFT};

/// Mean per-entry power of each term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPowers {
    pub desired: f64,
    pub truncation: f64,
    pub aliasing: f64,
    pub isci: f64,
    pub noise: f64,
    pub total_error: f64,
}

/// `Ĥ = H + I₀ + I₁ + I₂ + noise`, all terms on the T-F grid of the window.
///
/// * `I₀`: D-D response outside the `M̆ × N̆` corner that the interpolator drops.
/// * `I₁`: periodic images folded into the corner by down-sampling.
/// * `I₂`: image of the pilot contamination from taps other than `(0, 0)`.
/// * `noise`: image of the remaining pilot residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDecomposition {
    /// Rotated ground-truth D-D response.
    pub desired_dd: DDMatrix,
    pub desired: TFMatrix,
    pub truncation: CMatrix,
    pub aliasing: CMatrix,
    pub isci: CMatrix,
    pub noise: CMatrix,
    pub estimate: TFMatrix,
    pub powers: ErrorPowers,
}

impl ErrorDecomposition {
    /// `‖Ĥ − (H + I₀ + I₁ + I₂ + noise)‖ / ‖Ĥ‖`.
    pub fn residual(&self) -> f64 {
        let sum = &(&(&(self.desired.values() + &self.truncation) + &self.aliasing) + &self.isci) + &self.noise;
        let denom = self.estimate.values().norm_sqr().max(f64::MIN_POSITIVE);
        (self.estimate.values().dist_sqr(&sum) / denom).sqrt()
    }
}

fn mean_power(a: &CMatrix) -> f64 {
    a.norm_sqr() / a.as_slice().len() as f64
}

pub fn decompose_error(
    ch: &DDChannel,
    pulse: &Pulse,
    pattern: &PilotPattern,
    taps: &TapSet,
    frame: &Frame,
    rx: &RxFrame,
) -> Result<ErrorDecomposition> {
    let grid = *frame.grid();
    let (n, m) = (grid.n(), grid.m());
    let (np, mp) = (pattern.n_pilots(), pattern.m_pilots());
    let (l_n, l_m) = (pattern.l_n(), pattern.l_m());
    if n != np * l_n || m != mp * l_m {
        return Err(Error::InvalidPattern("pattern does not tile the frame".into()));
    }
    let shift = DEFAULT_DELAY_SHIFT;
    let ramp = PhaseRamp::new(&grid, np, shift);
    let derotate = |a: &CMatrix| CMatrix::from_fn(n, m, |r, c| a[(r, c)] * ramp.factor(r, c).conj());

    let h = channel_matrix(ch, pulse, &grid, TapIndex::DESIRED);
    let rotated = rotate_dd_with(&to_dd(&h), np, shift)?;
    let hv = rotated.values();

    let in_corner = |mt: usize, nt: usize| mt < mp && nt < np;
    let outside = CMatrix::from_fn(m, n, |mt, nt| if in_corner(mt, nt) { Complex64::new(0.0, 0.0) } else { -hv[(mt, nt)] });
    let folded = CMatrix::from_fn(m, n, |mt, nt| {
        if !in_corner(mt, nt) {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..l_m {
            for b in 0..l_n {
                if (a, b) != (0, 0) {
                    acc += hv[((mt + a * mp) % m, (nt + b * np) % n)];
                }
            }
        }
        acc
    });
    let truncation = derotate(&isfft(&outside, n, m)?);
    let aliasing = derotate(&isfft(&folded, n, m)?);

    let x = frame.symbols().values();
    let y = rx.y.values();
    let mut contamination = CMatrix::zeros(np, mp);
    let mut ls = CMatrix::zeros(np, mp);
    for a in 0..np {
        for b in 0..mp {
            let (pn, pm) = (a * l_n, b * l_m);
            let xp = x[(pn, pm)];
            ls[(a, b)] = y[(pn, pm)] / xp;
            let mut acc = Complex64::new(0.0, 0.0);
            for tap in taps.interference() {
                let (sn, sm) = (pn as i64 - tap.dn as i64, pm as i64 - tap.dm as i64);
                if sn < 0 || sm < 0 || sn >= n as i64 || sm >= m as i64 {
                    continue;
                }
                acc += channel_sample(ch, pulse, &grid, tap, pn, pm) * x[(sn as usize, sm as usize)];
            }
            contamination[(a, b)] = acc / xp;
        }
    }
    let residual_pilots = CMatrix::from_fn(np, mp, |a, b| {
        ls[(a, b)] - h.values()[(a * l_n, b * l_m)] - contamination[(a, b)]
    });
    let isci = reconstruct(&contamination, &grid, pattern, shift)?;
    let noise = reconstruct(&residual_pilots, &grid, pattern, shift)?;
    let estimate = TFMatrix::new(grid, reconstruct(&ls, &grid, pattern, shift)?)?;

    let total_error = mean_power(&(estimate.values() - h.values()));
    let powers = ErrorPowers {
        desired: mean_power(h.values()),
        truncation: mean_power(&truncation),
        aliasing: mean_power(&aliasing),
        isci: mean_power(&isci),
        noise: mean_power(&noise),
        total_error,
    };
    Ok(ErrorDecomposition { desired_dd: rotated, desired: h, truncation, aliasing, isci, noise, estimate, powers })
}
