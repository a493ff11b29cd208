//! Air-link model: uniform-linear-array steering vectors, analog beam
//! codebooks, sparse multipath channel draws, and the per-beam-pair coupling
//! they induce.
//!
//! The channel is a tapped delay line with a small number of discrete paths.
//! Each path has a positive gain, an integer delay confined to the cyclic
//! prefix, and a departure/arrival angle pair. When both ends apply analog
//! beams `w` (receive) and `f` (transmit), a path contributes through the
//! scalar coupling `eta = (w^H a_rx)(a_tx^H f)`, and the noise-free
//! delay-domain observation is `sqrt(rho) * eta_p * alpha_p` at the path's
//! delay tap.

use crate::dsp::ComplexSeq;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

// ── Errors ──────────────────────────────────────────────────────────────────

/// Errors from path-set construction and channel draws.
#[derive(Debug, Clone, PartialEq)]
pub enum AirlinkError {
    /// A path set needs at least one path.
    NoPaths,
    /// More paths were requested than there are distinct delay taps.
    TooManyPaths { paths: usize, delay_taps: usize },
    /// Parallel path arrays must share one length.
    RaggedFields {
        gains: usize,
        delays: usize,
        aoa: usize,
        aod: usize,
    },
    /// A delay fell outside the cyclic prefix `[0, delay_taps)`.
    DelayOutOfRange { index: usize, delay: usize },
    /// Two paths shared the same delay tap.
    DuplicateDelay { delay: usize },
    /// A gain was non-positive or the total power missed unity.
    BadGains { total_power: f64 },
    /// An angle fell outside the open interval (-pi/2, pi/2).
    AngleOutOfRange { index: usize, angle: f64 },
}

impl fmt::Display for AirlinkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AirlinkError::NoPaths => write!(f, "path set must contain at least one path"),
            AirlinkError::TooManyPaths { paths, delay_taps } => write!(
                f,
                "cannot place {paths} distinct delays in {delay_taps} taps"
            ),
            AirlinkError::RaggedFields {
                gains,
                delays,
                aoa,
                aod,
            } => write!(
                f,
                "path fields have mismatched lengths: gains {gains}, delays {delays}, aoa {aoa}, aod {aod}"
            ),
            AirlinkError::DelayOutOfRange { index, delay } => {
                write!(f, "path {index} delay {delay} outside the cyclic prefix")
            }
            AirlinkError::DuplicateDelay { delay } => {
                write!(f, "duplicate path delay {delay}")
            }
            AirlinkError::BadGains { total_power } => write!(
                f,
                "gains must be positive with unit total power (got {total_power})"
            ),
            AirlinkError::AngleOutOfRange { index, angle } => {
                write!(f, "path {index} angle {angle} outside (-pi/2, pi/2)")
            }
        }
    }
}

impl std::error::Error for AirlinkError {}

/// Tolerance on the unit-total-power constraint for path gains.
pub const GAIN_POWER_TOLERANCE: f64 = 1e-12;

// ── Steering vectors and codebooks ──────────────────────────────────────────

/// Unit-norm steering vector of a half-wavelength ULA:
/// entry `k` is `exp(j * pi * k * sin(angle)) / sqrt(n_antennas)`.
///
/// `angle` is in radians, measured from broadside, in `(-pi/2, pi/2]`.
pub fn steering_vector(angle: f64, n_antennas: usize) -> Vec<Complex64> {
    debug_assert!(n_antennas >= 1);
    let scale = 1.0 / (n_antennas as f64).sqrt();
    let step = PI * angle.sin();
    (0..n_antennas)
        .map(|k| Complex64::from_polar(scale, step * k as f64))
        .collect()
}

/// A bank of unit-norm analog beams on a sine-spaced angular grid.
///
/// Beam `i` (zero-based) points at `asin((i + 1 - n_beams/2) / (n_beams/2))`,
/// so the middle beam is broadside and the last beam reaches endfire. When
/// `n_beams` equals the antenna count the grid lands on the DFT directions
/// and the beams form an orthonormal basis.
#[derive(Debug, Clone)]
pub struct BeamCodebook {
    angles: Vec<f64>,
    vectors: Vec<Vec<Complex64>>,
    n_antennas: usize,
}

impl BeamCodebook {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    /// Grid angle of beam `index`, in radians.
    pub fn angle(&self, index: usize) -> f64 {
        self.angles[index]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Beam weight vector at `index`.
    pub fn beam(&self, index: usize) -> &[Complex64] {
        &self.vectors[index]
    }
}

/// Builds the sine-spaced codebook described on [`BeamCodebook`].
pub fn build_codebook(n_beams: usize, n_antennas: usize) -> BeamCodebook {
    debug_assert!(n_beams >= 1 && n_antennas >= 1);
    let half = n_beams as f64 / 2.0;
    let mut angles = Vec::with_capacity(n_beams);
    let mut vectors = Vec::with_capacity(n_beams);
    for i in 0..n_beams {
        let n = (i + 1) as f64;
        let angle = ((n - half) / half).asin();
        angles.push(angle);
        vectors.push(steering_vector(angle, n_antennas));
    }
    BeamCodebook {
        angles,
        vectors,
        n_antennas,
    }
}

// ── Path sets ───────────────────────────────────────────────────────────────

/// One path of a [`PathSet`], borrowed by value for convenience.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathView {
    pub gain: f64,
    pub delay: usize,
    pub aoa: f64,
    pub aod: f64,
}

/// A sparse multipath channel: positive gains with unit total power,
/// distinct integer delays inside the cyclic prefix, and one
/// arrival/departure angle pair per path.
///
/// Serializes as four parallel arrays (`gains`, `delays`, `aoa`, `aod`,
/// angles in radians), the layout used by the harness trial logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    gains: Vec<f64>,
    delays: Vec<usize>,
    aoa: Vec<f64>,
    aod: Vec<f64>,
}

impl PathSet {
    /// Validates the path-set invariants and builds the set.
    pub fn new(
        gains: Vec<f64>,
        delays: Vec<usize>,
        aoa: Vec<f64>,
        aod: Vec<f64>,
        delay_taps: usize,
    ) -> Result<Self, AirlinkError> {
        if gains.len() != delays.len() || gains.len() != aoa.len() || gains.len() != aod.len() {
            return Err(AirlinkError::RaggedFields {
                gains: gains.len(),
                delays: delays.len(),
                aoa: aoa.len(),
                aod: aod.len(),
            });
        }
        if gains.is_empty() {
            return Err(AirlinkError::NoPaths);
        }
        if gains.len() > delay_taps {
            return Err(AirlinkError::TooManyPaths {
                paths: gains.len(),
                delay_taps,
            });
        }
        let total_power: f64 = gains.iter().map(|g| g * g).sum();
        if gains.iter().any(|&g| !(g > 0.0)) || (total_power - 1.0).abs() > GAIN_POWER_TOLERANCE {
            return Err(AirlinkError::BadGains { total_power });
        }
        let mut seen = vec![false; delay_taps];
        for (index, &delay) in delays.iter().enumerate() {
            if delay >= delay_taps {
                return Err(AirlinkError::DelayOutOfRange { index, delay });
            }
            if seen[delay] {
                return Err(AirlinkError::DuplicateDelay { delay });
            }
            seen[delay] = true;
        }
        for (index, &angle) in aoa.iter().chain(aod.iter()).enumerate() {
            if !(angle > -FRAC_PI_2 && angle < FRAC_PI_2) {
                return Err(AirlinkError::AngleOutOfRange {
                    index: index % delays.len(),
                    angle,
                });
            }
        }
        Ok(Self {
            gains,
            delays,
            aoa,
            aod,
        })
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn aoa(&self) -> &[f64] {
        &self.aoa
    }

    pub fn aod(&self) -> &[f64] {
        &self.aod
    }

    pub fn path(&self, index: usize) -> PathView {
        PathView {
            gain: self.gains[index],
            delay: self.delays[index],
            aoa: self.aoa[index],
            aod: self.aod[index],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = PathView> + '_ {
        (0..self.len()).map(move |i| self.path(i))
    }
}

/// Draws a random path set: distinct delays uniform over `[0, delay_taps)`,
/// angles uniform over `(-pi/2, pi/2)`, and near-equal gains (per-path power
/// jittered by ±25% before normalizing to unit total power).
///
/// The mild gain spread keeps every path within a factor ~1.7 of the others
/// in power; the delay-detection stage then sees all paths cross its
/// threshold in the same SNR region instead of one path at a time.
pub fn draw_paths<R: Rng + ?Sized>(
    rng: &mut R,
    n_paths: usize,
    delay_taps: usize,
) -> Result<PathSet, AirlinkError> {
    if n_paths == 0 {
        return Err(AirlinkError::NoPaths);
    }
    if n_paths > delay_taps {
        return Err(AirlinkError::TooManyPaths {
            paths: n_paths,
            delay_taps,
        });
    }
    let delays: Vec<usize> = rand::seq::index::sample(rng, delay_taps, n_paths).into_vec();
    let powers: Vec<f64> = (0..n_paths).map(|_| rng.gen_range(0.75..1.25)).collect();
    let total: f64 = powers.iter().sum();
    let gains: Vec<f64> = powers.iter().map(|p| (p / total).sqrt()).collect();
    let aoa: Vec<f64> = (0..n_paths)
        .map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2))
        .collect();
    let aod: Vec<f64> = (0..n_paths)
        .map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2))
        .collect();
    PathSet::new(gains, delays, aoa, aod, delay_taps)
}

// ── Coupling and noise-free observations ────────────────────────────────────

/// Scalar coupling of one path through a beam pair:
/// `eta = (w^H a_rx(aoa)) * (a_tx(aod)^H f)`.
///
/// The steering vectors are built to the lengths of `rx_beam` and `tx_beam`.
pub fn coupling_coefficient(
    rx_beam: &[Complex64],
    tx_beam: &[Complex64],
    aoa: f64,
    aod: f64,
) -> Complex64 {
    let a_rx = steering_vector(aoa, rx_beam.len());
    let a_tx = steering_vector(aod, tx_beam.len());
    let rx_factor: Complex64 = rx_beam
        .iter()
        .zip(a_rx.iter())
        .map(|(w, a)| w.conj() * a)
        .sum();
    let tx_factor: Complex64 = a_tx
        .iter()
        .zip(tx_beam.iter())
        .map(|(a, f)| a.conj() * f)
        .sum();
    rx_factor * tx_factor
}

/// Noise-free delay-domain observation of length `len` for one beam pair:
/// zero everywhere except `sqrt(rho) * eta_p * alpha_p` at each path delay.
///
/// `len` must exceed every path delay (guaranteed when `len` is at least the
/// cyclic-prefix length the paths were drawn with).
pub fn noise_free_observation(
    paths: &PathSet,
    rx_beam: &[Complex64],
    tx_beam: &[Complex64],
    rho: f64,
    len: usize,
) -> ComplexSeq {
    let amp = rho.sqrt();
    let mut out = ComplexSeq::zeros(len);
    let samples = out.as_mut_slice();
    for p in paths.iter() {
        assert!(
            p.delay < len,
            "observation length {len} does not cover path delay {}",
            p.delay
        );
        let eta = coupling_coefficient(rx_beam, tx_beam, p.aoa, p.aod);
        samples[p.delay] += eta * (amp * p.gain);
    }
    out
}

/// Noise-free observation energy for one beam pair:
/// `sum_p |sqrt(rho) * eta_p * alpha_p|^2` (delays are distinct, so taps
/// never overlap).
pub fn energy_noise_free(
    paths: &PathSet,
    rx_beam: &[Complex64],
    tx_beam: &[Complex64],
    rho: f64,
) -> f64 {
    paths
        .iter()
        .map(|p| {
            let eta = coupling_coefficient(rx_beam, tx_beam, p.aoa, p.aod);
            rho * (eta.norm_sqr() * p.gain * p.gain)
        })
        .sum()
}
