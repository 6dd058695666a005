//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use ddest::channel::{Pulse, TapSet};
use ddest::modem::PilotPattern;
use ddest::transforms::TFGrid;
use serde::{Deserialize, Serialize};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Two-sided Doppler spread `2·v·f_c / c`.
pub fn doppler_from_speed(speed_mps: f64, carrier_hz: f64) -> f64 {
    2.0 * speed_mps * carrier_hz / SPEED_OF_LIGHT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub trials: usize,
    pub seed: u64,
    /// SNR points in dB; `inf` means noiseless.
    pub snr_db: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub grid: GridConfig,
    pub channel: ChannelConfig,
    pub pilots: PilotConfig,
    pub taps: TapConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Choose `T`, `F` from `T/F = τ_D/ν_D`; otherwise one of the two below.
    #[serde(default)]
    pub matched: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcarrier_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_duration: Option<f64>,
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub delay_spread: f64,
    /// Two-sided Doppler spread in Hz; alternatively derived from `speed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doppler_spread: Option<f64>,
    /// m/s
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_frequency: Option<f64>,
    pub paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotConfig {
    pub l_n: usize,
    pub l_m: usize,
    /// Pilot-column period of the OFDM comparator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ofdm_block_len: Option<usize>,
    /// Windows between re-anchoring on fresh pilots in data-aided tracking.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapConfig {
    pub max_dn: u32,
    pub max_dm: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bandwidths_hz: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delay_spreads_s: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub doppler_spreads_hz: Vec<f64>,
    /// `[N, M]` pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid_sizes: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub speeds_mps: Vec<f64>,
    /// Stream length in slots for the pipelined and tracking demos.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream_slots: Option<usize>,
    /// Nodes per axis of the ensemble ISCI quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_points: Option<usize>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure!(v.is_finite() && v > 0.0, "field `{name}` must be positive and finite, got {v}");
    Ok(())
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    ensure!(v.is_finite() && v >= 0.0, "field `{name}` must be >= 0 and finite, got {v}");
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.trials >= 1, "field `trials` must be >= 1");
        ensure!(!self.snr_db.is_empty(), "field `snr_db` must list at least one SNR point");
        for &s in &self.snr_db {
            ensure!(!s.is_nan() && s != f64::NEG_INFINITY, "field `snr_db` has an invalid entry {s}");
        }
        let g = &self.grid;
        ensure!(g.n >= 2 && g.m >= 2, "fields `grid.n` and `grid.m` must be >= 2");
        match (g.matched, g.subcarrier_spacing, g.symbol_duration) {
            (true, None, None) => {}
            (false, Some(f), None) => positive("grid.subcarrier_spacing", f)?,
            (false, None, Some(t)) => positive("grid.symbol_duration", t)?,
            (false, Some(f), Some(t)) => {
                positive("grid.subcarrier_spacing", f)?;
                positive("grid.symbol_duration", t)?;
                ensure!((f * t - 1.0).abs() < 1e-9, "fields `grid.symbol_duration` x `grid.subcarrier_spacing` must equal 1");
            }
            (true, _, _) => bail!("`grid.matched = true` excludes `grid.subcarrier_spacing` and `grid.symbol_duration`"),
            (false, None, None) => bail!("`grid` needs `subcarrier_spacing`, `symbol_duration` or `matched = true`"),
        }
        let c = &self.channel;
        non_negative("channel.delay_spread", c.delay_spread)?;
        ensure!(c.paths >= 1, "field `channel.paths` must be >= 1");
        match (c.doppler_spread, c.speed) {
            (Some(nu), None) => non_negative("channel.doppler_spread", nu)?,
            (None, Some(v)) => {
                non_negative("channel.speed", v)?;
                positive("channel.carrier_frequency", c.carrier_frequency.unwrap_or(f64::NAN))?;
            }
            (Some(_), Some(_)) => bail!("`channel.doppler_spread` and `channel.speed` are mutually exclusive"),
            (None, None) => {
                ensure!(!self.sweep.speeds_mps.is_empty() || !self.sweep.doppler_spreads_hz.is_empty(),
                    "`channel` needs `doppler_spread` or `speed` unless the sweep lists them");
            }
        }
        if !self.sweep.speeds_mps.is_empty() {
            positive("channel.carrier_frequency", c.carrier_frequency.unwrap_or(f64::NAN))?;
        }
        ensure!(self.pilots.l_n >= 1 && self.pilots.l_m >= 1, "fields `pilots.l_n`, `pilots.l_m` must be >= 1");
        if let Some(b) = self.pilots.ofdm_block_len {
            ensure!(b >= 1, "field `pilots.ofdm_block_len` must be >= 1");
        }
        if let Some(r) = self.pilots.restart_every {
            ensure!(r >= 1, "field `pilots.restart_every` must be >= 1");
        }
        for &b in &self.sweep.bandwidths_hz {
            positive("sweep.bandwidths_hz", b)?;
        }
        for &t in &self.sweep.delay_spreads_s {
            positive("sweep.delay_spreads_s", t)?;
        }
        for &v in &self.sweep.doppler_spreads_hz {
            positive("sweep.doppler_spreads_hz", v)?;
        }
        for &v in &self.sweep.speeds_mps {
            non_negative("sweep.speeds_mps", v)?;
        }
        for &[n, m] in &self.sweep.grid_sizes {
            ensure!(n >= 2 && m >= 2, "entries of `sweep.grid_sizes` must be >= 2");
        }
        Ok(())
    }

    pub fn doppler_spread(&self) -> Result<f64> {
        match (self.channel.doppler_spread, self.channel.speed) {
            (Some(nu), _) => Ok(nu),
            (None, Some(v)) => Ok(doppler_from_speed(v, self.channel.carrier_frequency.unwrap_or(0.0))),
            (None, None) => bail!("`channel` has neither `doppler_spread` nor `speed`"),
        }
    }

    pub fn doppler_for_speed(&self, speed: f64) -> f64 {
        doppler_from_speed(speed, self.channel.carrier_frequency.unwrap_or(0.0))
    }

    /// Grid for the given spreads and dimensions.
    pub fn grid_for(&self, delay_spread: f64, doppler_spread: f64, n: usize, m: usize) -> Result<TFGrid> {
        let g = &self.grid;
        let grid = if g.matched {
            TFGrid::matched_to_spreads(delay_spread, doppler_spread, n, m)?
        } else if let Some(f) = g.subcarrier_spacing {
            TFGrid::from_spacing(f, n, m)?
        } else {
            let t = g.symbol_duration.expect("validated");
            TFGrid::new(t, 1.0 / t, n, m)?
        };
        Ok(grid)
    }

    pub fn grid(&self) -> Result<TFGrid> {
        self.grid_for(self.channel.delay_spread, self.doppler_spread().unwrap_or(0.0), self.grid.n, self.grid.m)
    }

    pub fn pattern(&self, grid: &TFGrid) -> Result<PilotPattern> {
        Ok(PilotPattern::new(grid, self.pilots.l_n, self.pilots.l_m)?)
    }

    pub fn taps(&self, m: usize) -> TapSet {
        TapSet::truncated(self.taps.max_dn, self.taps.max_dm.min(m.saturating_sub(1) as u32))
    }

    pub fn pulse(grid: &TFGrid) -> Pulse {
        Pulse::rectangular(grid.symbol_duration())
    }

    pub fn quadrature_points(&self) -> usize {
        self.sweep.quadrature_points.unwrap_or(64)
    }
}

/// Noise variance for unit average channel gain.
pub fn noise_var(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}
