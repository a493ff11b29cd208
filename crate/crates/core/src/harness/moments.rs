//! Fixed-channel moment validation of the error decomposition.
//!
//! One channel is drawn and frozen; many independent noise draws then sound
//! the strongest reference pair with full-length training. Every draw's
//! estimated energy is split into `g = g_nf + eps + nu` (cross term plus
//! noise tally) and the empirical moments are compared against the analytic
//! model from [`crate::theory`]:
//!
//! * the split holds per draw to near machine precision (it is algebra, not
//!   statistics);
//! * `mean(nu)` approaches `L * noise_var`;
//! * `var(eps)` approaches `2 * noise_var * g_nf`;
//! * the empirical mean absolute error stays below the analytic bound.

use super::config::{noise_variance, SimConfig};
use super::trial::{lane, stream_seed};
use super::HarnessError;
use crate::airlink::{build_codebook, draw_paths, noise_free_observation};
use crate::estimation::deconv_full;
use crate::selection::{greedy_select, noise_free_energies};
use crate::sounding::{gen_training, synthesize_rx, TrainingMode, DEFAULT_TRAINING_ROOT};
use crate::theory::{error_model, mae_upper_bound, Stage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest accepted per-draw relative residual of the split.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
/// Largest accepted relative deviation of `mean(nu)` from `L * noise_var`.
pub const NU_MEAN_TOLERANCE: f64 = 0.02;
/// Largest accepted relative deviation of `var(eps)` from
/// `2 * noise_var * g_nf`.
pub const EPS_VARIANCE_TOLERANCE: f64 = 0.05;

/// Empirical moments of the decomposition at one fixed channel, with their
/// analytic counterparts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub snr_db: f64,
    pub draws: u64,
    /// Beam pair the draws sounded (strongest reference pair).
    pub pair: (usize, usize),
    /// Noise-free energy of that pair.
    pub g_nf: f64,
    /// Largest per-draw relative residual of `g - (g_nf + eps + nu)`.
    pub max_identity_residual: f64,
    pub nu_mean: f64,
    pub nu_mean_expected: f64,
    pub eps_variance: f64,
    pub eps_variance_expected: f64,
    pub mae: f64,
    pub mae_bound: f64,
}

impl DecompositionReport {
    pub fn identity_ok(&self) -> bool {
        self.max_identity_residual <= IDENTITY_TOLERANCE
    }

    pub fn nu_ok(&self) -> bool {
        (self.nu_mean - self.nu_mean_expected).abs() / self.nu_mean_expected <= NU_MEAN_TOLERANCE
    }

    pub fn eps_ok(&self) -> bool {
        (self.eps_variance - self.eps_variance_expected).abs() / self.eps_variance_expected
            <= EPS_VARIANCE_TOLERANCE
    }

    pub fn mae_ok(&self) -> bool {
        self.mae <= self.mae_bound
    }

    pub fn passes(&self) -> bool {
        self.identity_ok() && self.nu_ok() && self.eps_ok() && self.mae_ok()
    }

    /// Check names, outcomes, and human-readable details, for reporting.
    pub fn checks(&self) -> Vec<(&'static str, bool, String)> {
        vec![
            (
                "per-draw split identity",
                self.identity_ok(),
                format!(
                    "max relative residual {:.3e} (tolerance {:.0e})",
                    self.max_identity_residual, IDENTITY_TOLERANCE
                ),
            ),
            (
                "noise-tally mean",
                self.nu_ok(),
                format!(
                    "mean {:.6e} vs expected {:.6e} (tolerance {:.0}%)",
                    self.nu_mean,
                    self.nu_mean_expected,
                    NU_MEAN_TOLERANCE * 100.0
                ),
            ),
            (
                "cross-term variance",
                self.eps_ok(),
                format!(
                    "variance {:.6e} vs expected {:.6e} (tolerance {:.0}%)",
                    self.eps_variance,
                    self.eps_variance_expected,
                    EPS_VARIANCE_TOLERANCE * 100.0
                ),
            ),
            (
                "mean absolute error within bound",
                self.mae_ok(),
                format!("mae {:.6e} vs bound {:.6e}", self.mae, self.mae_bound),
            ),
        ]
    }
}

struct DrawMoments {
    residual: f64,
    eps: f64,
    nu: f64,
    abs_err: f64,
}

/// Freezes one channel from the config's seed and accumulates decomposition
/// moments over `draws` independent noise draws at `snr_db`.
pub fn validate_decomposition(
    cfg: &SimConfig,
    snr_db: f64,
    draws: u64,
) -> Result<DecompositionReport, HarnessError> {
    cfg.validate().map_err(HarnessError::Config)?;
    if draws < 2 {
        return Err(HarnessError::Config(super::ConfigError {
            field: "draws",
            reason: format!("need at least 2 noise draws, got {draws}"),
        }));
    }
    let noise_var = noise_variance(snr_db);
    let rx_book = build_codebook(cfg.n_w, cfg.n_r);
    let tx_book = build_codebook(cfg.n_f, cfg.n_t);
    let training = gen_training(cfg.l, 1, TrainingMode::Full, DEFAULT_TRAINING_ROOT)?;

    let mut ch_rng =
        ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, 0, 0, lane::CHANNEL));
    let paths = draw_paths(&mut ch_rng, cfg.p, cfg.l_c)?;
    let optimal = greedy_select(
        &noise_free_energies(&paths, &rx_book, &tx_book, cfg.rho),
        cfg.n_rf,
    )?;
    let (iw, jf) = optimal.pairs[0];
    let g_nf = optimal.objective[0];
    let rx_beam = rx_book.beam(iw);
    let tx_beam = tx_book.beam(jf);
    let y_nf = noise_free_observation(&paths, rx_beam, tx_beam, cfg.rho, cfg.l);

    let moments = (0..draws)
        .into_par_iter()
        .map(|d| -> Result<DrawMoments, HarnessError> {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(
                cfg.seed,
                0,
                d,
                lane::FULL_SOUNDING,
            ));
            let rx = synthesize_rx(
                &paths, rx_beam, tx_beam, &training, cfg.rho, noise_var, &mut rng,
            );
            let y = deconv_full(&training, &rx)?;
            let g = y.energy();
            let mut eps = 0.0;
            let mut nu = 0.0;
            for (obs, clean) in y.iter().zip(y_nf.iter()) {
                let xi = obs - clean;
                eps += 2.0 * (clean.re * xi.re + clean.im * xi.im);
                nu += xi.norm_sqr();
            }
            let residual = (g - (g_nf + eps + nu)).abs() / g.max(f64::MIN_POSITIVE);
            Ok(DrawMoments {
                residual,
                eps,
                nu,
                abs_err: (g - g_nf).abs(),
            })
        })
        .collect::<Result<Vec<DrawMoments>, HarnessError>>()?;

    let n = draws as f64;
    let max_identity_residual = moments.iter().map(|m| m.residual).fold(0.0, f64::max);
    let nu_mean = moments.iter().map(|m| m.nu).sum::<f64>() / n;
    let eps_mean = moments.iter().map(|m| m.eps).sum::<f64>() / n;
    let eps_variance =
        moments.iter().map(|m| (m.eps - eps_mean).powi(2)).sum::<f64>() / (n - 1.0);
    let mae = moments.iter().map(|m| m.abs_err).sum::<f64>() / n;
    let mae_bound = mae_upper_bound(&error_model(
        Stage::Raw { g_nf },
        noise_var,
        cfg.periods(),
        cfg.l,
    ));

    Ok(DecompositionReport {
        snr_db,
        draws,
        pair: (iw, jf),
        g_nf,
        max_identity_residual,
        nu_mean,
        nu_mean_expected: cfg.l as f64 * noise_var,
        eps_variance,
        eps_variance_expected: 2.0 * noise_var * g_nf,
        mae,
        mae_bound,
    })
}
