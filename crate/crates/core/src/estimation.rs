//! Deconvolution of sounded observations and delay-support estimation.
//!
//! The receive side first removes the known training from each beam pair's
//! received signal. Because the training circulant is unitary
//! ([`crate::sounding`]), deconvolution returns `sqrt(rho) * eta * alpha` at
//! each occupied delay tap plus white complex Gaussian noise:
//!
//! * [`deconv_full`] — full-length solve; noise variance stays at the
//!   receiver value.
//! * [`deconv_block_avg`] — periodic mode: average the received blocks, then
//!   solve once at block length; averaging divides the noise variance by the
//!   number of periods.
//!
//! Deconvolved rows across all beam pairs are collected in an
//! [`ObservationTensor`]; summing squared magnitudes over beam pairs gives a
//! per-tap [`power_profile`], and [`estimate_delays`] picks taps greedily
//! while they stay above a noise-floor threshold ([`threshold_mu`]).

use crate::dsp::{circulant_solve, ComplexSeq, DspError};
use crate::sounding::{TrainingMode, TrainingSignal};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, Read, Write};

// ── Errors ──────────────────────────────────────────────────────────────────

#[derive(Debug)]
pub enum EstimationError {
    /// The deconvolution routine does not match the training layout.
    WrongTrainingMode {
        expected: TrainingMode,
        got: TrainingMode,
    },
    /// Received length does not match the training length.
    LengthMismatch { expected: usize, got: usize },
    /// Spectrum division failed.
    Dsp(DspError),
    /// Binary stream does not start with the observation magic.
    BadMagic { found: [u8; 8] },
    /// Unknown observation-kind byte in a binary stream.
    BadKindByte { byte: u8 },
    /// Header declares an empty tensor.
    EmptyDims {
        n_rx_beams: usize,
        n_tx_beams: usize,
        len: usize,
    },
    /// Underlying reader or writer failure.
    Io(io::Error),
}

impl fmt::Display for EstimationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimationError::WrongTrainingMode { expected, got } => {
                write!(f, "deconvolution expects {expected:?} training, got {got:?}")
            }
            EstimationError::LengthMismatch { expected, got } => {
                write!(f, "received length {got} does not match training length {expected}")
            }
            EstimationError::Dsp(e) => write!(f, "deconvolution failed: {e}"),
            EstimationError::BadMagic { found } => {
                write!(f, "bad observation magic {found:?}")
            }
            EstimationError::BadKindByte { byte } => {
                write!(f, "unknown observation kind byte {byte}")
            }
            EstimationError::EmptyDims {
                n_rx_beams,
                n_tx_beams,
                len,
            } => write!(
                f,
                "observation dimensions {n_rx_beams}x{n_tx_beams}x{len} must all be positive"
            ),
            EstimationError::Io(e) => write!(f, "observation i/o failed: {e}"),
        }
    }
}

impl std::error::Error for EstimationError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            EstimationError::Dsp(e) => Some(e),
            EstimationError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<DspError> for EstimationError {
    fn from(e: DspError) -> Self {
        EstimationError::Dsp(e)
    }
}

impl From<io::Error> for EstimationError {
    fn from(e: io::Error) -> Self {
        EstimationError::Io(e)
    }
}

// ── Deconvolution ───────────────────────────────────────────────────────────

/// Removes full-length training from one received signal. The result has one
/// entry per delay tap of the full length and carries noise of the receiver
/// variance.
pub fn deconv_full(
    training: &TrainingSignal,
    received: &ComplexSeq,
) -> Result<ComplexSeq, EstimationError> {
    if training.mode() != TrainingMode::Full {
        return Err(EstimationError::WrongTrainingMode {
            expected: TrainingMode::Full,
            got: training.mode(),
        });
    }
    if received.len() != training.total_len() {
        return Err(EstimationError::LengthMismatch {
            expected: training.total_len(),
            got: received.len(),
        });
    }
    Ok(circulant_solve(training.circulant(), received)?)
}

/// Averages the received blocks of periodic training, then removes one block
/// of training. The result has one entry per tap of the block length and
/// carries noise of the receiver variance divided by the period count.
pub fn deconv_block_avg(
    training: &TrainingSignal,
    received: &ComplexSeq,
) -> Result<ComplexSeq, EstimationError> {
    if training.mode() != TrainingMode::Periodic {
        return Err(EstimationError::WrongTrainingMode {
            expected: TrainingMode::Periodic,
            got: training.mode(),
        });
    }
    if received.len() != training.total_len() {
        return Err(EstimationError::LengthMismatch {
            expected: training.total_len(),
            got: received.len(),
        });
    }
    let block = training.block_len();
    let periods = training.periods();
    let mut avg = vec![Complex64::new(0.0, 0.0); block];
    for m in 0..periods {
        let chunk = &received.as_slice()[m * block..(m + 1) * block];
        for (a, v) in avg.iter_mut().zip(chunk) {
            *a += v;
        }
    }
    let scale = 1.0 / periods as f64;
    for a in &mut avg {
        *a *= scale;
    }
    let avg = ComplexSeq::new(avg).expect("averaged blocks stay finite");
    Ok(circulant_solve(training.circulant(), &avg)?)
}

// ── Observation tensor ──────────────────────────────────────────────────────

/// Which deconvolution stage produced a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationKind {
    /// Full-length deconvolution; rows span every delay tap.
    Raw,
    /// Block-averaged deconvolution; rows span one block of taps.
    Refined,
}

impl ObservationKind {
    fn to_byte(self) -> u8 {
        match self {
            ObservationKind::Raw => 0,
            ObservationKind::Refined => 1,
        }
    }

    fn from_byte(byte: u8) -> Result<Self, EstimationError> {
        match byte {
            0 => Ok(ObservationKind::Raw),
            1 => Ok(ObservationKind::Refined),
            _ => Err(EstimationError::BadKindByte { byte }),
        }
    }
}

/// Deconvolved observations for every beam pair of a codebook sweep, stored
/// row-major: the row for receive beam `iw` and transmit beam `jf` starts at
/// `(iw * n_tx_beams + jf) * len`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationTensor {
    kind: ObservationKind,
    n_rx_beams: usize,
    n_tx_beams: usize,
    len: usize,
    noise_var: f64,
    data: Vec<Complex64>,
}

const OBSERVATION_MAGIC: [u8; 8] = *b"BEAMOBS1";

impl ObservationTensor {
    /// A zero-filled tensor. `noise_var` is the per-tap noise variance the
    /// rows carry after their deconvolution stage.
    pub fn new(
        kind: ObservationKind,
        n_rx_beams: usize,
        n_tx_beams: usize,
        len: usize,
        noise_var: f64,
    ) -> Self {
        assert!(n_rx_beams > 0 && n_tx_beams > 0 && len > 0, "empty tensor");
        ObservationTensor {
            kind,
            n_rx_beams,
            n_tx_beams,
            len,
            noise_var,
            data: vec![Complex64::new(0.0, 0.0); n_rx_beams * n_tx_beams * len],
        }
    }

    pub fn kind(&self) -> ObservationKind {
        self.kind
    }

    pub fn n_rx_beams(&self) -> usize {
        self.n_rx_beams
    }

    pub fn n_tx_beams(&self) -> usize {
        self.n_tx_beams
    }

    /// Delay taps per row.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    fn offset(&self, rx_beam: usize, tx_beam: usize) -> usize {
        assert!(
            rx_beam < self.n_rx_beams && tx_beam < self.n_tx_beams,
            "beam pair ({rx_beam}, {tx_beam}) out of range for {}x{} tensor",
            self.n_rx_beams,
            self.n_tx_beams
        );
        (rx_beam * self.n_tx_beams + tx_beam) * self.len
    }

    pub fn row(&self, rx_beam: usize, tx_beam: usize) -> &[Complex64] {
        let start = self.offset(rx_beam, tx_beam);
        &self.data[start..start + self.len]
    }

    pub fn set_row(&mut self, rx_beam: usize, tx_beam: usize, values: &[Complex64]) {
        assert_eq!(values.len(), self.len, "row length mismatch");
        let start = self.offset(rx_beam, tx_beam);
        self.data[start..start + self.len].copy_from_slice(values);
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.len)
    }

    /// Serializes in a fixed little-endian layout: magic, kind byte, three
    /// `u32` dimensions, `f64` noise variance, then `f64` re/im pairs in row
    /// order.
    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<(), EstimationError> {
        writer.write_all(&OBSERVATION_MAGIC)?;
        writer.write_all(&[self.kind.to_byte()])?;
        for dim in [self.n_rx_beams, self.n_tx_beams, self.len] {
            let dim = u32::try_from(dim).expect("tensor dimension fits in u32");
            writer.write_all(&dim.to_le_bytes())?;
        }
        writer.write_all(&self.noise_var.to_le_bytes())?;
        for v in &self.data {
            writer.write_all(&v.re.to_le_bytes())?;
            writer.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut reader: R) -> Result<Self, EstimationError> {
        let mut magic = [0u8; 8];
        reader.read_exact(&mut magic)?;
        if magic != OBSERVATION_MAGIC {
            return Err(EstimationError::BadMagic { found: magic });
        }
        let mut byte = [0u8; 1];
        reader.read_exact(&mut byte)?;
        let kind = ObservationKind::from_byte(byte[0])?;
        let mut dims = [0usize; 3];
        for dim in &mut dims {
            let mut raw = [0u8; 4];
            reader.read_exact(&mut raw)?;
            *dim = u32::from_le_bytes(raw) as usize;
        }
        let [n_rx_beams, n_tx_beams, len] = dims;
        if n_rx_beams == 0 || n_tx_beams == 0 || len == 0 {
            return Err(EstimationError::EmptyDims {
                n_rx_beams,
                n_tx_beams,
                len,
            });
        }
        let mut raw = [0u8; 8];
        reader.read_exact(&mut raw)?;
        let noise_var = f64::from_le_bytes(raw);
        let total = n_rx_beams * n_tx_beams * len;
        let mut data = Vec::with_capacity(total);
        for _ in 0..total {
            reader.read_exact(&mut raw)?;
            let re = f64::from_le_bytes(raw);
            reader.read_exact(&mut raw)?;
            let im = f64::from_le_bytes(raw);
            data.push(Complex64::new(re, im));
        }
        Ok(ObservationTensor {
            kind,
            n_rx_beams,
            n_tx_beams,
            len,
            noise_var,
            data,
        })
    }
}

// ── Delay-support estimation ────────────────────────────────────────────────

/// Per-tap received power summed over every beam pair:
/// `profile[l] = sum_{iw, jf} |row(iw, jf)[l]|^2`.
pub fn power_profile(obs: &ObservationTensor) -> Vec<f64> {
    let mut profile = vec![0.0; obs.len()];
    for row in obs.rows() {
        for (acc, v) in profile.iter_mut().zip(row) {
            *acc += v.norm_sqr();
        }
    }
    profile
}

/// Noise floor of a beam-pair-summed power profile: each of the
/// `n_rx_beams * n_tx_beams` rows contributes noise of variance
/// `noise_var / periods` per tap, so a tap holding no path has mean power
/// `n_rx_beams * n_tx_beams * noise_var / periods`.
pub fn threshold_mu(n_rx_beams: usize, n_tx_beams: usize, noise_var: f64, periods: usize) -> f64 {
    (n_rx_beams * n_tx_beams) as f64 * noise_var / periods as f64
}

/// Delay taps believed to hold paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayEstimate {
    /// Selected taps in selection order (descending profile power).
    pub indices: Vec<usize>,
    /// Threshold the selection stopped at.
    pub threshold: f64,
    /// Profile power at each selected tap, parallel to `indices`.
    pub powers: Vec<f64>,
}

impl DelayEstimate {
    /// An estimate fixed from externally known taps; no profile was examined,
    /// so `threshold` is zero and `powers` is empty.
    pub fn from_indices(indices: Vec<usize>) -> Self {
        DelayEstimate {
            indices,
            threshold: 0.0,
            powers: Vec::new(),
        }
    }
}

/// Greedily picks profile peaks: repeatedly take the strongest remaining tap
/// (lowest index on ties) while it exceeds `threshold` strictly, stopping at
/// `max_paths` taps.
pub fn estimate_delays(profile: &[f64], threshold: f64, max_paths: usize) -> DelayEstimate {
    let mut taken = vec![false; profile.len()];
    let mut indices = Vec::new();
    let mut powers = Vec::new();
    while indices.len() < max_paths {
        let mut best: Option<usize> = None;
        for (l, &value) in profile.iter().enumerate() {
            if taken[l] {
                continue;
            }
            match best {
                Some(b) if profile[b] >= value => {}
                _ => best = Some(l),
            }
        }
        let Some(b) = best else { break };
        if profile[b] <= threshold {
            break;
        }
        taken[b] = true;
        indices.push(b);
        powers.push(profile[b]);
    }
    DelayEstimate {
        indices,
        threshold,
        powers,
    }
}
