//! Beam-pair energy readout and greedy pair selection.
//!
//! Every selection strategy reduces to the same two steps: score each
//! (receive beam, transmit beam) pair with an energy estimate, then greedily
//! pick as many pairs as there are RF chains, never reusing a beam on either
//! side. The strategies differ only in the energy matrix they score with:
//!
//! * [`energy_full`] — total energy of full-length deconvolved observations;
//! * [`energy_refined`] — total energy of block-averaged observations;
//! * [`energy_delay_restricted`] — block-averaged energy summed only over an
//!   estimated (or externally known) set of delay taps;
//! * [`noise_free_energies`] — the exact coupled path energies, which score
//!   the selection an ideal receiver would make.

use crate::airlink::{energy_noise_free, BeamCodebook, PathSet};
use crate::estimation::{DelayEstimate, ObservationKind, ObservationTensor};
use serde::{Deserialize, Serialize};
use std::fmt;

// ── Errors ──────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionError {
    /// The observation tensor came from the wrong deconvolution stage.
    WrongObservationKind {
        expected: ObservationKind,
        got: ObservationKind,
    },
    /// A delay estimate points past the tensor's tap range.
    TapOutOfRange { tap: usize, len: usize },
    /// More pairs requested than distinct beams available on one side.
    TooManyChains {
        requested: usize,
        rx_beams: usize,
        tx_beams: usize,
    },
}

impl fmt::Display for SelectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionError::WrongObservationKind { expected, got } => {
                write!(f, "energy readout expects {expected:?} observations, got {got:?}")
            }
            SelectionError::TapOutOfRange { tap, len } => {
                write!(f, "delay tap {tap} is out of range for {len} observed taps")
            }
            SelectionError::TooManyChains {
                requested,
                rx_beams,
                tx_beams,
            } => write!(
                f,
                "cannot select {requested} pairs from {rx_beams}x{tx_beams} beams"
            ),
        }
    }
}

impl std::error::Error for SelectionError {}

// ── Energy matrices ─────────────────────────────────────────────────────────

/// Which estimate produced an energy matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    Raw,
    Refined,
    DelayRestricted,
    NoiseFree,
}

/// Per-beam-pair energy scores, row-major over (receive beam, transmit beam).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyMatrix {
    kind: EnergyKind,
    n_rx_beams: usize,
    n_tx_beams: usize,
    values: Vec<f64>,
}

impl EnergyMatrix {
    /// Builds a matrix from row-major values; panics if the shape is
    /// inconsistent or empty.
    pub fn from_values(
        kind: EnergyKind,
        n_rx_beams: usize,
        n_tx_beams: usize,
        values: Vec<f64>,
    ) -> Self {
        assert!(n_rx_beams > 0 && n_tx_beams > 0, "empty energy matrix");
        assert_eq!(values.len(), n_rx_beams * n_tx_beams, "shape mismatch");
        EnergyMatrix {
            kind,
            n_rx_beams,
            n_tx_beams,
            values,
        }
    }

    pub fn kind(&self) -> EnergyKind {
        self.kind
    }

    pub fn n_rx_beams(&self) -> usize {
        self.n_rx_beams
    }

    pub fn n_tx_beams(&self) -> usize {
        self.n_tx_beams
    }

    pub fn value(&self, rx_beam: usize, tx_beam: usize) -> f64 {
        assert!(
            rx_beam < self.n_rx_beams && tx_beam < self.n_tx_beams,
            "beam pair ({rx_beam}, {tx_beam}) out of range"
        );
        self.values[rx_beam * self.n_tx_beams + tx_beam]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn energy_from_tensor(
    obs: &ObservationTensor,
    expected: ObservationKind,
    kind: EnergyKind,
) -> Result<EnergyMatrix, SelectionError> {
    if obs.kind() != expected {
        return Err(SelectionError::WrongObservationKind {
            expected,
            got: obs.kind(),
        });
    }
    let values = obs
        .rows()
        .map(|row| row.iter().map(|v| v.norm_sqr()).sum())
        .collect();
    Ok(EnergyMatrix::from_values(
        kind,
        obs.n_rx_beams(),
        obs.n_tx_beams(),
        values,
    ))
}

/// Total observed energy per pair from full-length deconvolved observations.
pub fn energy_full(obs: &ObservationTensor) -> Result<EnergyMatrix, SelectionError> {
    energy_from_tensor(obs, ObservationKind::Raw, EnergyKind::Raw)
}

/// Total observed energy per pair from block-averaged observations.
pub fn energy_refined(obs: &ObservationTensor) -> Result<EnergyMatrix, SelectionError> {
    energy_from_tensor(obs, ObservationKind::Refined, EnergyKind::Refined)
}

/// Block-averaged energy per pair summed only over the estimate's delay
/// taps. The taps act as a set: duplicates count once and the summation
/// order is canonical, so two estimates naming the same taps in different
/// orders read out bit-identical energies.
pub fn energy_delay_restricted(
    obs: &ObservationTensor,
    delays: &DelayEstimate,
) -> Result<EnergyMatrix, SelectionError> {
    if obs.kind() != ObservationKind::Refined {
        return Err(SelectionError::WrongObservationKind {
            expected: ObservationKind::Refined,
            got: obs.kind(),
        });
    }
    for &tap in &delays.indices {
        if tap >= obs.len() {
            return Err(SelectionError::TapOutOfRange {
                tap,
                len: obs.len(),
            });
        }
    }
    let mut taps = delays.indices.clone();
    taps.sort_unstable();
    taps.dedup();
    let values = obs
        .rows()
        .map(|row| taps.iter().map(|&tap| row[tap].norm_sqr()).sum())
        .collect();
    Ok(EnergyMatrix::from_values(
        EnergyKind::DelayRestricted,
        obs.n_rx_beams(),
        obs.n_tx_beams(),
        values,
    ))
}

/// Exact noise-free coupled energy per pair, scored over whole codebooks.
pub fn noise_free_energies(
    paths: &PathSet,
    rx_book: &BeamCodebook,
    tx_book: &BeamCodebook,
    rho: f64,
) -> EnergyMatrix {
    let mut values = Vec::with_capacity(rx_book.len() * tx_book.len());
    for iw in 0..rx_book.len() {
        for jf in 0..tx_book.len() {
            values.push(energy_noise_free(
                paths,
                rx_book.beam(iw),
                tx_book.beam(jf),
                rho,
            ));
        }
    }
    EnergyMatrix::from_values(EnergyKind::NoiseFree, rx_book.len(), tx_book.len(), values)
}

// ── Greedy pair selection ───────────────────────────────────────────────────

/// Beam pairs picked for the RF chains, in pick order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// `(receive beam, transmit beam)` per chain, strongest first.
    pub pairs: Vec<(usize, usize)>,
    /// Energy score of each picked pair, parallel to `pairs`.
    pub objective: Vec<f64>,
}

impl SelectionResult {
    /// Sum of the picked pairs' scores.
    pub fn total(&self) -> f64 {
        self.objective.iter().sum()
    }
}

/// Greedily picks `num_chains` beam pairs: at each stage take the highest
/// remaining score (smallest `(rx, tx)` on ties), then retire that receive
/// beam and that transmit beam so no beam serves two chains.
pub fn greedy_select(
    scores: &EnergyMatrix,
    num_chains: usize,
) -> Result<SelectionResult, SelectionError> {
    if num_chains > scores.n_rx_beams().min(scores.n_tx_beams()) {
        return Err(SelectionError::TooManyChains {
            requested: num_chains,
            rx_beams: scores.n_rx_beams(),
            tx_beams: scores.n_tx_beams(),
        });
    }
    let mut rx_used = vec![false; scores.n_rx_beams()];
    let mut tx_used = vec![false; scores.n_tx_beams()];
    let mut pairs = Vec::with_capacity(num_chains);
    let mut objective = Vec::with_capacity(num_chains);
    for _ in 0..num_chains {
        let mut best: Option<(usize, usize)> = None;
        for iw in 0..scores.n_rx_beams() {
            if rx_used[iw] {
                continue;
            }
            for jf in 0..scores.n_tx_beams() {
                if tx_used[jf] {
                    continue;
                }
                match best {
                    // A strictly larger score displaces the front-runner, so
                    // ties keep the first pair met in row-major order.
                    Some((bi, bj)) if scores.value(bi, bj) >= scores.value(iw, jf) => {}
                    _ => best = Some((iw, jf)),
                }
            }
        }
        let (iw, jf) = best.expect("chain count is within both beam counts");
        rx_used[iw] = true;
        tx_used[jf] = true;
        pairs.push((iw, jf));
        objective.push(scores.value(iw, jf));
    }
    Ok(SelectionResult { pairs, objective })
}

/// The selection an ideal receiver makes: greedy pick over the exact
/// noise-free pair energies.
pub fn optimal_pairs(
    paths: &PathSet,
    rx_book: &BeamCodebook,
    tx_book: &BeamCodebook,
    rho: f64,
    num_chains: usize,
) -> Result<SelectionResult, SelectionError> {
    greedy_select(&noise_free_energies(paths, rx_book, tx_book, rho), num_chains)
}
