//! Analytical error model for the beam-pair energy estimates.
//!
//! For any tap set `S`, the estimated energy of one beam pair decomposes
//! exactly as
//!
//! `g_hat = g_nf(S) + eps + nu`
//!
//! where `g_nf(S)` is the noise-free energy over `S`, `eps` is the
//! signal-noise cross term, and `nu` is the pure-noise tally. With white
//! complex Gaussian observation noise of per-tap variance `v`:
//!
//! * `eps` is zero-mean Gaussian with variance `2 * v * g_nf(S)`;
//! * `nu` is a sum over `|S|` taps of squared complex Gaussians — mean
//!   `|S| * v`, Gamma-shaped with shape `|S|` and scale `v`;
//! * if `S` drops occupied taps, the estimate is further short by the
//!   deterministic deficit `g_nf - g_nf(S)`.
//!
//! The triangle inequality then bounds the mean absolute estimation error:
//!
//! `E|g_hat - g_nf| <= deficit + E|eps| + E[nu]
//!                   = deficit + sqrt(2 * var(eps) / pi) + shape * scale`.
//!
//! [`error_model`] instantiates the parameters for each estimation stage and
//! [`mae_upper_bound`] evaluates the bound. The stage parameters also yield
//! closed-form low-noise gaps between the stages' error floors
//! ([`predicted_gap_full_vs_refined`], [`predicted_gap_refined_vs_explicit`]).

use serde::{Deserialize, Serialize};

/// Estimation stage whose error is being modeled, with the noise-free
/// energies the model needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stage {
    /// Full-length deconvolution: every delay tap contributes noise at the
    /// receiver variance.
    Raw { g_nf: f64 },
    /// Block-averaged deconvolution: one block of taps, each at the receiver
    /// variance divided by the period count.
    Refined { g_nf: f64 },
    /// Block-averaged energy restricted to an estimated tap set that captures
    /// `g_nf_restricted` of the pair's `g_nf`.
    DelayRestricted {
        g_nf: f64,
        g_nf_restricted: f64,
        selected: usize,
    },
    /// Block-averaged energy restricted to the exact occupied taps.
    ExplicitDelay { g_nf: f64, paths: usize },
}

/// Parameters of the exact error decomposition for one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    /// Variance of the Gaussian cross term.
    pub eps_variance: f64,
    /// Shape (tap count) of the pure-noise tally.
    pub nu_shape: f64,
    /// Scale (per-tap noise variance) of the pure-noise tally.
    pub nu_scale: f64,
    /// Deterministic energy lost to taps outside the readout set.
    pub deficit: f64,
}

/// Error-model parameters for a stage, given the receiver noise variance,
/// the number of training periods, and the full training length.
pub fn error_model(stage: Stage, noise_var: f64, periods: usize, symbol_len: usize) -> ErrorModel {
    let refined_var = noise_var / periods as f64;
    match stage {
        Stage::Raw { g_nf } => ErrorModel {
            eps_variance: 2.0 * noise_var * g_nf,
            nu_shape: symbol_len as f64,
            nu_scale: noise_var,
            deficit: 0.0,
        },
        Stage::Refined { g_nf } => ErrorModel {
            eps_variance: 2.0 * refined_var * g_nf,
            nu_shape: symbol_len as f64 / periods as f64,
            nu_scale: refined_var,
            deficit: 0.0,
        },
        Stage::DelayRestricted {
            g_nf,
            g_nf_restricted,
            selected,
        } => ErrorModel {
            eps_variance: 2.0 * refined_var * g_nf_restricted,
            nu_shape: selected as f64,
            nu_scale: refined_var,
            deficit: g_nf - g_nf_restricted,
        },
        Stage::ExplicitDelay { g_nf, paths } => ErrorModel {
            eps_variance: 2.0 * refined_var * g_nf,
            nu_shape: paths as f64,
            nu_scale: refined_var,
            deficit: 0.0,
        },
    }
}

/// Upper bound on the mean absolute estimation error:
/// `deficit + sqrt(2 * eps_variance / pi) + nu_shape * nu_scale`.
pub fn mae_upper_bound(model: &ErrorModel) -> f64 {
    model.deficit
        + (2.0 * model.eps_variance / std::f64::consts::PI).sqrt()
        + model.nu_shape * model.nu_scale
}

/// Low-noise error-floor gap, in dB, between full-length and block-averaged
/// estimation: averaging `periods` blocks divides both the per-tap variance
/// and the tap count by `periods`, so the noise tally drops by `periods^2`.
pub fn predicted_gap_full_vs_refined(periods: usize) -> f64 {
    20.0 * (periods as f64).log10()
}

/// Low-noise error-floor gap, in dB, between block-averaged estimation over
/// a whole block and the same estimate read out on the exact occupied taps:
/// the tap count drops from `symbol_len / periods` to `paths`.
pub fn predicted_gap_refined_vs_explicit(symbol_len: usize, periods: usize, paths: usize) -> f64 {
    10.0 * (symbol_len as f64 / (periods * paths) as f64).log10()
}
