//! Simulation configuration: the knobs of a Monte Carlo run, JSON loading,
//! and validation.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

// ── Estimation methods ──────────────────────────────────────────────────────

/// Energy-estimation method swept by the harness. Declaration order is the
/// reporting order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Full-length deconvolution, energy over every delay tap.
    Ref,
    /// Block-averaged deconvolution, energy over one block of taps.
    Refined,
    /// Block-averaged energy restricted to taps picked by thresholding the
    /// delay-power profile.
    EstimatedDelay,
    /// Block-averaged energy restricted to the true occupied taps.
    ExplicitDelay,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Ref,
        Method::Refined,
        Method::EstimatedDelay,
        Method::ExplicitDelay,
    ];

    /// Stable lowercase name, also used in CSV rows and JSON.
    pub fn label(self) -> &'static str {
        match self {
            Method::Ref => "ref",
            Method::Refined => "refined",
            Method::EstimatedDelay => "estimated_delay",
            Method::ExplicitDelay => "explicit_delay",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

// ── Noise convention ────────────────────────────────────────────────────────

/// Receiver noise variance for a point on the sweep's SNR axis:
/// `10^(-snr_db / 10)`. The sounding power `rho` is configured separately,
/// so the axis controls the noise level alone.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

// ── Configuration ───────────────────────────────────────────────────────────

fn default_rho() -> f64 {
    16.0
}

fn default_trials() -> u64 {
    100
}

fn default_seed() -> u64 {
    1
}

fn default_modes() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_snr_grid() -> Vec<f64> {
    (-4..=4).map(|i| (i * 5) as f64).collect()
}

/// Full description of a Monte Carlo run. Loadable from a JSON object whose
/// keys are exactly these field names; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Transmit antennas.
    pub n_t: usize,
    /// Receive antennas.
    pub n_r: usize,
    /// RF chains — beam pairs selected per trial.
    pub n_rf: usize,
    /// Samples per training symbol (power of two).
    pub l: usize,
    /// Delay taps the channel may occupy — one training block (power of two
    /// dividing `l`).
    pub l_c: usize,
    /// Transmit codebook size.
    pub n_f: usize,
    /// Receive codebook size.
    pub n_w: usize,
    /// Propagation paths per channel draw.
    pub p: usize,
    /// Sounding power.
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// SNR axis in dB; each point sets the receiver noise variance via
    /// [`noise_variance`].
    #[serde(default = "default_snr_grid")]
    pub snr_grid: Vec<f64>,
    /// Monte Carlo trials per SNR point.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Root seed; every trial derives an independent stream from it.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Estimation methods to evaluate.
    #[serde(default = "default_modes")]
    pub modes: Vec<Method>,
}

/// A configuration field that failed validation, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError {
            field,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

impl SimConfig {
    /// The shipped evaluation setup: 32x32 antennas, two RF chains, 2048
    /// samples over 128 taps (16 training blocks), 32-beam codebooks, ten
    /// paths, and a -20..20 dB sweep of all four methods.
    pub fn baseline() -> Self {
        SimConfig {
            n_t: 32,
            n_r: 32,
            n_rf: 2,
            l: 2048,
            l_c: 128,
            n_f: 32,
            n_w: 32,
            p: 10,
            rho: default_rho(),
            snr_grid: default_snr_grid(),
            trials: default_trials(),
            seed: default_seed(),
            modes: default_modes(),
        }
    }

    /// The baseline restricted to the delay-estimating method — the setup
    /// that traces the delay-error-rate curve.
    pub fn delay_curve_baseline() -> Self {
        SimConfig {
            modes: vec![Method::EstimatedDelay],
            ..SimConfig::baseline()
        }
    }

    /// Training blocks per symbol.
    pub fn periods(&self) -> usize {
        self.l / self.l_c
    }

    /// Checks every invariant, reporting the first offending field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_t == 0 {
            return Err(ConfigError::new("n_t", "need at least one transmit antenna"));
        }
        if self.n_r == 0 {
            return Err(ConfigError::new("n_r", "need at least one receive antenna"));
        }
        if self.l < 2 || !self.l.is_power_of_two() {
            return Err(ConfigError::new(
                "l",
                format!("symbol length {} must be a power of two >= 2", self.l),
            ));
        }
        if self.l_c < 2 || !self.l_c.is_power_of_two() {
            return Err(ConfigError::new(
                "l_c",
                format!("block length {} must be a power of two >= 2", self.l_c),
            ));
        }
        if self.l_c > self.l || self.l % self.l_c != 0 {
            return Err(ConfigError::new(
                "l_c",
                format!("block length {} must divide symbol length {}", self.l_c, self.l),
            ));
        }
        if self.n_f == 0 {
            return Err(ConfigError::new("n_f", "need at least one transmit beam"));
        }
        if self.n_w == 0 {
            return Err(ConfigError::new("n_w", "need at least one receive beam"));
        }
        if self.n_rf == 0 || self.n_rf > self.n_f.min(self.n_w) {
            return Err(ConfigError::new(
                "n_rf",
                format!(
                    "chain count {} must be between 1 and min(n_f, n_w) = {}",
                    self.n_rf,
                    self.n_f.min(self.n_w)
                ),
            ));
        }
        if self.p == 0 || self.p > self.l_c {
            return Err(ConfigError::new(
                "p",
                format!(
                    "path count {} must be between 1 and the block length {}",
                    self.p, self.l_c
                ),
            ));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(ConfigError::new(
                "rho",
                format!("sounding power {} must be positive and finite", self.rho),
            ));
        }
        if self.snr_grid.is_empty() {
            return Err(ConfigError::new("snr_grid", "need at least one SNR point"));
        }
        if let Some(bad) = self.snr_grid.iter().find(|v| !v.is_finite()) {
            return Err(ConfigError::new(
                "snr_grid",
                format!("SNR point {bad} is not finite"),
            ));
        }
        if self.trials == 0 {
            return Err(ConfigError::new("trials", "need at least one trial"));
        }
        if self.modes.is_empty() {
            return Err(ConfigError::new("modes", "need at least one method"));
        }
        for (i, mode) in self.modes.iter().enumerate() {
            if self.modes[..i].contains(mode) {
                return Err(ConfigError::new(
                    "modes",
                    format!("method `{mode}` listed more than once"),
                ));
            }
        }
        Ok(())
    }

    /// Loads and validates a JSON configuration file.
    pub fn from_json_file(path: &Path) -> Result<Self, super::HarnessError> {
        let text = std::fs::read_to_string(path).map_err(super::HarnessError::Io)?;
        let cfg: SimConfig = serde_json::from_str(&text).map_err(super::HarnessError::Parse)?;
        cfg.validate().map_err(super::HarnessError::Config)?;
        Ok(cfg)
    }

    /// True when `mode` is enabled.
    pub fn has_mode(&self, mode: Method) -> bool {
        self.modes.contains(&mode)
    }

    /// The enabled methods in reporting order.
    pub fn modes_in_order(&self) -> Vec<Method> {
        Method::ALL
            .iter()
            .copied()
            .filter(|m| self.has_mode(*m))
            .collect()
    }
}
