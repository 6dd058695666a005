use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Rectangular,
}

/// Unit-energy transmit/receive pulse supported on `[0, duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub kind: PulseKind,
    pub duration: f64,
}

impl Pulse {
    pub fn rectangular(duration: f64) -> Self {
        assert!(duration > 0.0, "pulse duration must be positive");
        Self { kind: PulseKind::Rectangular, duration }
    }

    pub fn sample(&self, t: f64) -> f64 {
        match self.kind {
            PulseKind::Rectangular => {
                if (0.0..self.duration).contains(&t) {
                    self.duration.sqrt().recip()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn energy(&self) -> f64 {
        match self.kind {
            PulseKind::Rectangular => 1.0,
        }
    }
}

/// `A(τ, ν) = ∫ g_t(t) g_r(t − τ) e^{−j2πν(t − τ)} dt`.
///
/// For two unit-energy rectangular pulses of duration `T` and `|τ| < T`:
/// `e^{−jπν(T − τ)} · sin(πν(T − |τ|)) / (πνT)`, zero otherwise.
pub fn cross_ambiguity(g_t: &Pulse, g_r: &Pulse, tau: f64, nu: f64) -> Complex64 {
    match (g_t.kind, g_r.kind) {
        (PulseKind::Rectangular, PulseKind::Rectangular) if g_t.duration == g_r.duration => {
            let t = g_t.duration;
            let overlap = t - tau.abs();
            if overlap <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let x = PI * nu * overlap;
            let mag = if x.abs() < 1e-8 { overlap / t * (1.0 - x * x / 6.0) } else { x.sin() / (PI * nu * t) };
            Complex64::from_polar(1.0, -PI * nu * (t - tau)) * mag
        }
        _ => cross_ambiguity_quadrature(g_t, g_r, tau, nu, 200_000),
    }
}

/// Composite trapezoidal evaluation of the cross-ambiguity integral over the
/// support overlap.
pub fn cross_ambiguity_quadrature(g_t: &Pulse, g_r: &Pulse, tau: f64, nu: f64, points: usize) -> Complex64 {
    let lo = 0.0f64.max(tau);
    let hi = g_t.duration.min(g_r.duration + tau);
    if hi <= lo || points < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let h = (hi - lo) / (points - 1) as f64;
    // interior nodes avoid the half-open support edges
    let f = |t: f64| {
        let a = g_t.sample(t.min(g_t.duration * (1.0 - 1e-15)));
        let b = g_r.sample((t - tau).clamp(0.0, g_r.duration * (1.0 - 1e-15)));
        Complex64::from_polar(a * b, -2.0 * PI * nu * (t - tau))
    };
    let mut acc = (f(lo) + f(hi)) * 0.5;
    for i in 1..points - 1 {
        acc += f(lo + i as f64 * h);
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_unit_energy() {
        let p = Pulse::rectangular(5e-6);
        assert!((cross_ambiguity(&p, &p, 0.0, 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(p.energy(), 1.0);
    }

    #[test]
    fn zeros_at_integer_frequency_offsets() {
        let t = 5e-6;
        let p = Pulse::rectangular(t);
        for l in [-3i32, -1, 1, 2, 7] {
            assert!(cross_ambiguity(&p, &p, 0.0, l as f64 / t).norm() < 1e-12);
        }
        assert_eq!(cross_ambiguity(&p, &p, t, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(cross_ambiguity(&p, &p, -1.5 * t, 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let t = 5e-6;
        let f = 1.0 / t;
        let p = Pulse::rectangular(t);
        for (tau, nu) in [(t / 10.0, f / 10.0), (-0.3 * t, 1.7 * f), (0.8 * t, -0.45 * f)] {
            let closed = cross_ambiguity(&p, &p, tau, nu);
            let quad = cross_ambiguity_quadrature(&p, &p, tau, nu, 100_001);
            assert!((closed - quad).norm() < 1e-6, "{closed} vs {quad}");
            assert!((closed.norm() - quad.norm()).abs() < 1e-6);
        }
    }
}
