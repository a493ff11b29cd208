//! Monte Carlo experiment runner: configuration, deterministic per-trial
//! pipelines, SNR sweeps, fixed-channel moment validation, and result
//! emission (CSV plus JSON manifest).

pub mod config;
pub mod moments;
pub mod report;
pub mod sweep;
pub mod trial;

pub use config::{noise_variance, ConfigError, Method, SimConfig};
pub use moments::{
    validate_decomposition, DecompositionReport, EPS_VARIANCE_TOLERANCE, IDENTITY_TOLERANCE,
    NU_MEAN_TOLERANCE,
};
pub use report::{csv_string, manifest_json, write_csv, RunManifest, ToolInfo, CSV_HEADER};
pub use sweep::{run_sweep, ModeStats, SweepRecord};
pub use trial::{run_trial, run_trial_with_context, stream_seed, SweepContext, TrialRecord};

use crate::airlink::AirlinkError;
use crate::estimation::EstimationError;
use crate::selection::SelectionError;
use crate::sounding::SoundingError;
use std::fmt;
use std::io;

/// Any failure while configuring or running an experiment.
#[derive(Debug)]
pub enum HarnessError {
    Config(ConfigError),
    Airlink(AirlinkError),
    Sounding(SoundingError),
    Estimation(EstimationError),
    Selection(SelectionError),
    Io(io::Error),
    Parse(serde_json::Error),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(e) => write!(f, "{e}"),
            HarnessError::Airlink(e) => write!(f, "channel model: {e}"),
            HarnessError::Sounding(e) => write!(f, "training: {e}"),
            HarnessError::Estimation(e) => write!(f, "estimation: {e}"),
            HarnessError::Selection(e) => write!(f, "selection: {e}"),
            HarnessError::Io(e) => write!(f, "i/o: {e}"),
            HarnessError::Parse(e) => write!(f, "config parse: {e}"),
        }
    }
}

impl std::error::Error for HarnessError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            HarnessError::Config(e) => Some(e),
            HarnessError::Airlink(e) => Some(e),
            HarnessError::Sounding(e) => Some(e),
            HarnessError::Estimation(e) => Some(e),
            HarnessError::Selection(e) => Some(e),
            HarnessError::Io(e) => Some(e),
            HarnessError::Parse(e) => Some(e),
        }
    }
}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Config(e)
    }
}

impl From<AirlinkError> for HarnessError {
    fn from(e: AirlinkError) -> Self {
        HarnessError::Airlink(e)
    }
}

impl From<SoundingError> for HarnessError {
    fn from(e: SoundingError) -> Self {
        HarnessError::Sounding(e)
    }
}

impl From<EstimationError> for HarnessError {
    fn from(e: EstimationError) -> Self {
        HarnessError::Estimation(e)
    }
}

impl From<SelectionError> for HarnessError {
    fn from(e: SelectionError) -> Self {
        HarnessError::Selection(e)
    }
}
