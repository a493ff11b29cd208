//! One Monte Carlo trial: draw a channel, sound it, and score every enabled
//! estimation method at the reference beam pairs.
//!
//! Determinism contract: everything a trial consumes from randomness flows
//! through [`stream_seed`], a hash of `(seed, snr_index, trial_index, lane)`.
//! Each lane owns one independent generator — the channel draw, the
//! full-length sounding noise, and the periodic sounding noise — so trials
//! can run in any order, on any number of workers, and still reproduce
//! bit-identical records.

use crate::airlink::{coupling_coefficient, draw_paths, BeamCodebook, PathSet};
use crate::estimation::{
    deconv_block_avg, deconv_full, estimate_delays, power_profile, threshold_mu, DelayEstimate,
    ObservationKind, ObservationTensor,
};
use crate::selection::{
    energy_delay_restricted, energy_refined, greedy_select, noise_free_energies, EnergyMatrix,
    SelectionResult,
};
use crate::sounding::{
    gen_training, synthesize_rx, TrainingMode, TrainingSignal, DEFAULT_TRAINING_ROOT,
};
use crate::theory::{error_model, mae_upper_bound, Stage};
use super::config::{noise_variance, Method, SimConfig};
use super::HarnessError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

// ── Deterministic stream derivation ─────────────────────────────────────────

/// Independent randomness lanes within one trial.
pub mod lane {
    /// Channel draw (paths, gains, angles).
    pub const CHANNEL: u64 = 0;
    /// Receiver noise of the full-length sounding pass.
    pub const FULL_SOUNDING: u64 = 1;
    /// Receiver noise of the periodic sounding pass.
    pub const PERIODIC_SOUNDING: u64 = 2;
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the generator for one `(run seed, SNR index, trial, lane)` cell.
pub fn stream_seed(seed: u64, snr_index: u64, trial_index: u64, lane: u64) -> u64 {
    let mut s = splitmix(seed);
    s = splitmix(s ^ snr_index);
    s = splitmix(s ^ trial_index);
    s = splitmix(s ^ lane);
    s
}

fn lane_rng(cfg: &SimConfig, snr_index: usize, trial_index: u64, lane: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, snr_index as u64, trial_index, lane))
}

// ── Shared per-sweep state ──────────────────────────────────────────────────

/// Immutable state shared by every trial of a sweep: the validated config,
/// both codebooks, and the training signals the enabled methods need.
#[derive(Debug, Clone)]
pub struct SweepContext {
    cfg: SimConfig,
    rx_book: BeamCodebook,
    tx_book: BeamCodebook,
    full_training: Option<TrainingSignal>,
    periodic_training: Option<TrainingSignal>,
}

impl SweepContext {
    pub fn new(cfg: &SimConfig) -> Result<Self, HarnessError> {
        cfg.validate().map_err(HarnessError::Config)?;
        let rx_book = crate::airlink::build_codebook(cfg.n_w, cfg.n_r);
        let tx_book = crate::airlink::build_codebook(cfg.n_f, cfg.n_t);
        let full_training = if cfg.has_mode(Method::Ref) {
            Some(gen_training(cfg.l, 1, TrainingMode::Full, DEFAULT_TRAINING_ROOT)?)
        } else {
            None
        };
        let periodic_training = if cfg.modes.iter().any(|m| *m != Method::Ref) {
            Some(gen_training(
                cfg.l_c,
                cfg.periods(),
                TrainingMode::Periodic,
                DEFAULT_TRAINING_ROOT,
            )?)
        } else {
            None
        };
        Ok(SweepContext {
            cfg: cfg.clone(),
            rx_book,
            tx_book,
            full_training,
            periodic_training,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn rx_book(&self) -> &BeamCodebook {
        &self.rx_book
    }

    pub fn tx_book(&self) -> &BeamCodebook {
        &self.tx_book
    }
}

// ── Trial records ───────────────────────────────────────────────────────────

/// Everything one trial produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub snr_db: f64,
    pub snr_index: usize,
    pub trial_index: u64,
    /// Reference selection from the exact noise-free energies; its
    /// `objective` holds the noise-free energy of each selected pair.
    pub optimal: SelectionResult,
    /// Occupied delay taps of the drawn channel.
    pub true_delays: Vec<usize>,
    /// Per-method absolute estimation error, averaged over the reference
    /// pairs.
    pub mode_error: BTreeMap<Method, f64>,
    /// Per-method analytic error bound, averaged over the reference pairs.
    pub mode_bound: BTreeMap<Method, f64>,
    /// Tap set picked by the delay-estimating method, when enabled.
    pub estimated_delays: Option<DelayEstimate>,
    /// Fraction of true delays the estimate missed, when enabled.
    pub delay_error_rate: Option<f64>,
}

// ── Trial pipeline ──────────────────────────────────────────────────────────

/// Noise-free energy of one beam pair restricted to a tap set. Uses the
/// same per-path summand and summation order as the unrestricted reference
/// energy so that a tap set covering every occupied tap reproduces it
/// bit-exactly.
fn restricted_noise_free(
    paths: &PathSet,
    rx_beam: &[num_complex::Complex64],
    tx_beam: &[num_complex::Complex64],
    rho: f64,
    taps: &[usize],
) -> f64 {
    paths
        .iter()
        .filter(|p| taps.contains(&p.delay))
        .map(|p| {
            let eta = coupling_coefficient(rx_beam, tx_beam, p.aoa, p.aod);
            rho * (eta.norm_sqr() * p.gain * p.gain)
        })
        .sum()
}

/// Scores one method from its energy matrix: absolute error and analytic
/// bound at each reference pair, averaged over the pairs.
fn score_pairs(
    optimal: &SelectionResult,
    estimates: &EnergyMatrix,
    stage_for_pair: impl Fn(usize) -> Stage,
    noise_var: f64,
    periods: usize,
    symbol_len: usize,
) -> (f64, f64) {
    let n = optimal.pairs.len() as f64;
    let mut err = 0.0;
    let mut bound = 0.0;
    for (k, &(iw, jf)) in optimal.pairs.iter().enumerate() {
        let g_nf = optimal.objective[k];
        err += (estimates.value(iw, jf) - g_nf).abs();
        bound += mae_upper_bound(&error_model(stage_for_pair(k), noise_var, periods, symbol_len));
    }
    (err / n, bound / n)
}

/// Runs one trial against shared sweep state. `snr_index` addresses
/// `config.snr_grid` and must be in range.
pub fn run_trial_with_context(
    ctx: &SweepContext,
    snr_index: usize,
    trial_index: u64,
) -> Result<TrialRecord, HarnessError> {
    let cfg = &ctx.cfg;
    assert!(
        snr_index < cfg.snr_grid.len(),
        "snr index {snr_index} out of range for {} grid points",
        cfg.snr_grid.len()
    );
    let snr_db = cfg.snr_grid[snr_index];
    let noise_var = noise_variance(snr_db);
    let periods = cfg.periods();

    // Channel draw.
    let mut ch_rng = lane_rng(cfg, snr_index, trial_index, lane::CHANNEL);
    let paths = draw_paths(&mut ch_rng, cfg.p, cfg.l_c)?;

    // Reference pairs from the exact noise-free energies.
    let g_nf_matrix = noise_free_energies(&paths, &ctx.rx_book, &ctx.tx_book, cfg.rho);
    let optimal = greedy_select(&g_nf_matrix, cfg.n_rf)?;

    let mut mode_error = BTreeMap::new();
    let mut mode_bound = BTreeMap::new();
    let mut estimated_delays = None;
    let mut delay_error_rate = None;

    // Full-length sounding pass, only at the reference pairs.
    if cfg.has_mode(Method::Ref) {
        let training = ctx
            .full_training
            .as_ref()
            .expect("context built with the full-length method enabled");
        let mut rng = lane_rng(cfg, snr_index, trial_index, lane::FULL_SOUNDING);
        let n = optimal.pairs.len() as f64;
        let mut err = 0.0;
        let mut bound = 0.0;
        for (k, &(iw, jf)) in optimal.pairs.iter().enumerate() {
            let rx = synthesize_rx(
                &paths,
                ctx.rx_book.beam(iw),
                ctx.tx_book.beam(jf),
                training,
                cfg.rho,
                noise_var,
                &mut rng,
            );
            let g = deconv_full(training, &rx)?.energy();
            let g_nf = optimal.objective[k];
            err += (g - g_nf).abs();
            bound += mae_upper_bound(&error_model(
                Stage::Raw { g_nf },
                noise_var,
                periods,
                cfg.l,
            ));
        }
        mode_error.insert(Method::Ref, err / n);
        mode_bound.insert(Method::Ref, bound / n);
    }

    // Periodic sounding pass: every beam pair, one shared noise stream, in
    // row-major pair order.
    if cfg.modes.iter().any(|m| *m != Method::Ref) {
        let training = ctx
            .periodic_training
            .as_ref()
            .expect("context built with a block-averaged method enabled");
        let mut rng = lane_rng(cfg, snr_index, trial_index, lane::PERIODIC_SOUNDING);
        let mut tensor = ObservationTensor::new(
            ObservationKind::Refined,
            cfg.n_w,
            cfg.n_f,
            cfg.l_c,
            noise_var / periods as f64,
        );
        for iw in 0..cfg.n_w {
            for jf in 0..cfg.n_f {
                let rx = synthesize_rx(
                    &paths,
                    ctx.rx_book.beam(iw),
                    ctx.tx_book.beam(jf),
                    training,
                    cfg.rho,
                    noise_var,
                    &mut rng,
                );
                let row = deconv_block_avg(training, &rx)?;
                tensor.set_row(iw, jf, row.as_slice());
            }
        }

        if cfg.has_mode(Method::Refined) {
            let estimates = energy_refined(&tensor)?;
            let (err, bound) = score_pairs(
                &optimal,
                &estimates,
                |k| Stage::Refined {
                    g_nf: optimal.objective[k],
                },
                noise_var,
                periods,
                cfg.l,
            );
            mode_error.insert(Method::Refined, err);
            mode_bound.insert(Method::Refined, bound);
        }

        if cfg.has_mode(Method::EstimatedDelay) {
            let profile = power_profile(&tensor);
            let mu = threshold_mu(cfg.n_w, cfg.n_f, noise_var, periods);
            let est = estimate_delays(&profile, mu, cfg.l_c);
            let missed = paths
                .delays()
                .iter()
                .filter(|d| !est.indices.contains(d))
                .count();
            delay_error_rate = Some(missed as f64 / cfg.p as f64);

            let estimates = energy_delay_restricted(&tensor, &est)?;
            let restricted: Vec<f64> = optimal
                .pairs
                .iter()
                .map(|&(iw, jf)| {
                    restricted_noise_free(
                        &paths,
                        ctx.rx_book.beam(iw),
                        ctx.tx_book.beam(jf),
                        cfg.rho,
                        &est.indices,
                    )
                })
                .collect();
            let (err, bound) = score_pairs(
                &optimal,
                &estimates,
                |k| Stage::DelayRestricted {
                    g_nf: optimal.objective[k],
                    g_nf_restricted: restricted[k],
                    selected: est.indices.len(),
                },
                noise_var,
                periods,
                cfg.l,
            );
            mode_error.insert(Method::EstimatedDelay, err);
            mode_bound.insert(Method::EstimatedDelay, bound);
            estimated_delays = Some(est);
        }

        if cfg.has_mode(Method::ExplicitDelay) {
            let truth = DelayEstimate::from_indices(paths.delays().to_vec());
            let estimates = energy_delay_restricted(&tensor, &truth)?;
            let (err, bound) = score_pairs(
                &optimal,
                &estimates,
                |k| Stage::ExplicitDelay {
                    g_nf: optimal.objective[k],
                    paths: cfg.p,
                },
                noise_var,
                periods,
                cfg.l,
            );
            mode_error.insert(Method::ExplicitDelay, err);
            mode_bound.insert(Method::ExplicitDelay, bound);
        }
    }

    Ok(TrialRecord {
        snr_db,
        snr_index,
        trial_index,
        optimal,
        true_delays: paths.delays().to_vec(),
        mode_error,
        mode_bound,
        estimated_delays,
        delay_error_rate,
    })
}

/// Runs one trial from a bare config (building the shared state on the fly).
pub fn run_trial(
    cfg: &SimConfig,
    snr_index: usize,
    trial_index: u64,
) -> Result<TrialRecord, HarnessError> {
    let ctx = SweepContext::new(cfg)?;
    run_trial_with_context(&ctx, snr_index, trial_index)
}
