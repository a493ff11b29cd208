//! Training-signal generation and received-signal synthesis for channel
//! sounding.
//!
//! Training uses constant-amplitude polyphase (Zadoff–Chu style) sequences.
//! Their block DFT has constant magnitude, so the circulant matrix built from
//! the sequence is unitary: deconvolving the received signal neither colors
//! nor amplifies the receiver noise, and the post-deconvolution noise stays
//! exactly complex Gaussian with the receiver variance.
//!
//! Two layouts are supported:
//! * [`TrainingMode::Full`] — one length-`L` sequence (`L = block_len *
//!   periods`), amplitude `1/sqrt(L)`; deconvolution runs on the full-length
//!   circulant.
//! * [`TrainingMode::Periodic`] — one length-`block_len` sequence, amplitude
//!   `1/sqrt(block_len)`, tiled `periods` times; deconvolution runs per block
//!   on the small circulant, and averaging the blocks divides the noise
//!   variance by `periods`.

use crate::airlink::{coupling_coefficient, PathSet};
use crate::dsp::{CirculantSpec, ComplexSeq};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

// ── Errors ──────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum SoundingError {
    /// The block length must be a power of two of at least 2.
    BadBlockLen { block_len: usize },
    /// At least one period is required.
    ZeroPeriods,
    /// The sequence root must be odd (coprime with the power-of-two length).
    BadRoot { root: u32 },
}

impl fmt::Display for SoundingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SoundingError::BadBlockLen { block_len } => {
                write!(f, "block length {block_len} must be a power of two >= 2")
            }
            SoundingError::ZeroPeriods => write!(f, "training needs at least one period"),
            SoundingError::BadRoot { root } => {
                write!(f, "training root {root} must be odd")
            }
        }
    }
}

impl std::error::Error for SoundingError {}

// ── Training signals ────────────────────────────────────────────────────────

/// Layout of the transmitted training sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingMode {
    /// A single full-length sequence.
    Full,
    /// One block tiled `periods` times.
    Periodic,
}

/// A generated training signal plus the cached circulant spectrum used to
/// deconvolve against it (full length in full mode, one block in periodic
/// mode).
#[derive(Debug, Clone)]
pub struct TrainingSignal {
    samples: ComplexSeq,
    block_len: usize,
    periods: usize,
    mode: TrainingMode,
    root: u32,
    circulant: CirculantSpec,
}

impl TrainingSignal {
    pub fn samples(&self) -> &ComplexSeq {
        &self.samples
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn mode(&self) -> TrainingMode {
        self.mode
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    /// Total transmitted length `block_len * periods`.
    pub fn total_len(&self) -> usize {
        self.block_len * self.periods
    }

    /// The circulant the deconvolution stage divides by: full length in full
    /// mode, block length in periodic mode.
    pub fn circulant(&self) -> &CirculantSpec {
        &self.circulant
    }
}

/// Constant-amplitude quadratic-phase sequence of even length:
/// `s[n] = amplitude * exp(-j * pi * root * n^2 / len)`.
///
/// The phase index `root * n^2` is reduced modulo `2 * len` in integer
/// arithmetic before touching floating point, so the phase argument stays in
/// `(-2*pi, 0]` and the sequence keeps its flat spectrum to near machine
/// precision at any length.
fn quadratic_phase_sequence(len: usize, root: u32, amplitude: f64) -> Vec<Complex64> {
    let two_len = 2 * len as u64;
    (0..len)
        .map(|n| {
            let n = n as u64;
            let k = (u64::from(root) * (n * n)) % two_len;
            Complex64::from_polar(amplitude, -PI * k as f64 / len as f64)
        })
        .collect()
}

/// Generates a training signal.
///
/// `block_len` must be a power of two of at least 2, `periods` at least 1,
/// and `root` odd (hence coprime with every power-of-two length).
pub fn gen_training(
    block_len: usize,
    periods: usize,
    mode: TrainingMode,
    root: u32,
) -> Result<TrainingSignal, SoundingError> {
    if block_len < 2 || !block_len.is_power_of_two() {
        return Err(SoundingError::BadBlockLen { block_len });
    }
    if periods == 0 {
        return Err(SoundingError::ZeroPeriods);
    }
    if root % 2 == 0 {
        return Err(SoundingError::BadRoot { root });
    }
    let total = block_len * periods;
    let (samples, circulant) = match mode {
        TrainingMode::Full => {
            let seq = quadratic_phase_sequence(total, root, 1.0 / (total as f64).sqrt());
            let samples = ComplexSeq::new(seq).expect("generated sequence is finite");
            let circulant = CirculantSpec::new(samples.clone());
            (samples, circulant)
        }
        TrainingMode::Periodic => {
            let block =
                quadratic_phase_sequence(block_len, root, 1.0 / (block_len as f64).sqrt());
            let mut tiled = Vec::with_capacity(total);
            for _ in 0..periods {
                tiled.extend_from_slice(&block);
            }
            let samples = ComplexSeq::new(tiled).expect("generated sequence is finite");
            let circulant = CirculantSpec::new(
                ComplexSeq::new(block).expect("generated block is finite"),
            );
            (samples, circulant)
        }
    };
    Ok(TrainingSignal {
        samples,
        block_len,
        periods,
        mode,
        root,
        circulant,
    })
}

/// Default training root used by the shipped configurations.
pub const DEFAULT_TRAINING_ROOT: u32 = 1;

// ── Received-signal synthesis ───────────────────────────────────────────────

/// Synthesizes one beam pair's received sounding signal:
///
/// `r[l] = sqrt(rho) * sum_p eta_p * alpha_p * s[(l - d_p) mod L] + z[l]`
///
/// with `z` circularly-symmetric complex Gaussian of total variance
/// `noise_var` (`noise_var = 0` produces the noiseless signal). The sum is
/// the length-`L` circular convolution of the training with the beam-coupled
/// channel taps.
pub fn synthesize_rx<R: Rng + ?Sized>(
    paths: &PathSet,
    rx_beam: &[Complex64],
    tx_beam: &[Complex64],
    training: &TrainingSignal,
    rho: f64,
    noise_var: f64,
    rng: &mut R,
) -> ComplexSeq {
    let len = training.total_len();
    let s = training.samples().as_slice();
    let amp = rho.sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for p in paths.iter() {
        debug_assert!(p.delay < len);
        let tap = coupling_coefficient(rx_beam, tx_beam, p.aoa, p.aod) * (amp * p.gain);
        // Circular shift of the training by the path delay.
        let split = len - p.delay;
        for (o, v) in out[p.delay..].iter_mut().zip(&s[..split]) {
            *o += tap * v;
        }
        for (o, v) in out[..p.delay].iter_mut().zip(&s[split..]) {
            *o += tap * v;
        }
    }
    if noise_var > 0.0 {
        let sigma = (noise_var / 2.0).sqrt();
        for o in &mut out {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *o += Complex64::new(sigma * re, sigma * im);
        }
    }
    ComplexSeq::new(out).expect("synthesized signal is finite")
}
