//! SNR sweeps: fan independent trials out to worker threads and aggregate
//! them into per-SNR records.
//!
//! Aggregation is order-independent — trials are keyed by `(snr_index,
//! trial_index)` and averaged arithmetically — so serial and parallel runs
//! produce identical results.

use super::config::{Method, SimConfig};
use super::trial::{run_trial_with_context, SweepContext, TrialRecord};
use super::HarnessError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Aggregated estimation quality of one method at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeStats {
    /// Mean absolute estimation error over trials (linear).
    pub mae_linear: f64,
    /// The same error as `10 * log10(mae_linear)`.
    pub mae_db: f64,
    /// Standard error of `mae_linear` over the trials.
    pub mae_se_linear: f64,
    /// Mean analytic bound over trials (linear).
    pub bound_linear: f64,
    /// The same bound as `10 * log10(bound_linear)`.
    pub bound_db: f64,
}

/// One SNR point of a sweep: per-method statistics plus the delay-error rate
/// when the delay-estimating method ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub trials: u64,
    pub delay_error_rate: Option<f64>,
    pub modes: BTreeMap<Method, ModeStats>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error of the mean (zero for a single sample).
fn standard_error(values: &[f64], mean: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

pub(crate) fn aggregate(cfg: &SimConfig, snr_db: f64, records: &[TrialRecord]) -> SweepRecord {
    let mut modes = BTreeMap::new();
    for mode in cfg.modes_in_order() {
        let errors: Vec<f64> = records.iter().map(|r| r.mode_error[&mode]).collect();
        let bounds: Vec<f64> = records.iter().map(|r| r.mode_bound[&mode]).collect();
        let mae_linear = mean(&errors);
        let bound_linear = mean(&bounds);
        modes.insert(
            mode,
            ModeStats {
                mae_linear,
                mae_db: 10.0 * mae_linear.log10(),
                mae_se_linear: standard_error(&errors, mae_linear),
                bound_linear,
                bound_db: 10.0 * bound_linear.log10(),
            },
        );
    }
    let delay_error_rate = if cfg.has_mode(Method::EstimatedDelay) {
        let rates: Vec<f64> = records
            .iter()
            .map(|r| r.delay_error_rate.expect("delay method ran"))
            .collect();
        Some(mean(&rates))
    } else {
        None
    };
    SweepRecord {
        snr_db,
        trials: cfg.trials,
        delay_error_rate,
        modes,
    }
}

/// Runs the full sweep: `trials` independent trials at every SNR point,
/// aggregated per point. Work is spread over the active rayon thread pool.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<SweepRecord>, HarnessError> {
    let ctx = SweepContext::new(cfg)?;
    let mut out = Vec::with_capacity(cfg.snr_grid.len());
    for (snr_index, &snr_db) in cfg.snr_grid.iter().enumerate() {
        let records = (0..cfg.trials)
            .into_par_iter()
            .map(|trial_index| run_trial_with_context(&ctx, snr_index, trial_index))
            .collect::<Result<Vec<TrialRecord>, HarnessError>>()?;
        out.push(aggregate(cfg, snr_db, &records));
    }
    Ok(out)
}
