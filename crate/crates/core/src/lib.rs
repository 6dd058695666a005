//! Simulation of doubly-dispersive (delay-Doppler spread) channels and
//! low-overhead channel acquisition on a Weyl-Heisenberg time-frequency grid.
//!
//! The crate is organised bottom-up:
//!
//! * [`transforms`]: symplectic finite Fourier transform, Dirichlet kernel,
//!   window functions and the rotations used by the estimator.
//! * [`channel`]: ground-truth delay-Doppler paths, rectangular-pulse
//!   cross-ambiguity and the discrete channel matrices `H_{δn,δm}`.
//! * [`modem`]: frames with lattice or block pilots, transmission through the
//!   discrete channel (including inter-symbol/carrier interference) and
//!   one-tap detection.
//! * [`estimator`]: least-squares pilots, SFFT interpolation, the pipelined
//!   and extrapolating variants, an OFDM block-pilot baseline and the
//!   truncation/aliasing/interference error decomposition.
//! * [`metrics`]: NMSE, interference power, training overhead, achievable
//!   rate and empirical CDFs.

pub mod channel;
pub mod error;
pub mod estimator;
pub mod matrix;
pub mod metrics;
pub mod modem;
pub mod rng;
pub mod transforms;

pub use error::{Error, Result};
pub use matrix::CMatrix;
pub use num_complex::Complex64;
